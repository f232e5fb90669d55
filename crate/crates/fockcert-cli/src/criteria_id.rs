//! Parsing and evaluation of criterion identifiers.

use fockcert::criteria::{
    k_infinity_with_tol, klyshko_with_tol, triple_with_tol, CriterionVerdict,
};
use fockcert::majorization::{evaluate_pair_with_tol, IndexTuple, MajorizationPair};
use fockcert::FockDistribution;

/// One evaluatable criterion, named by its stable id.
#[derive(Clone, Debug)]
pub enum CriterionSpec {
    /// `K1` / `Kk:<k>` — neighbor criterion `Q_k^2 > Q_{k-1} Q_{k+1}`.
    Klyshko(usize),
    /// `Kinf:<N>` — tail criterion from `P_0..P_N`.
    Tail(usize),
    /// `triple:<n>,<m>,<k>` — three-index product criterion.
    Triple(usize, usize, usize),
    /// `maj:<I>|<J>` — general product criterion from a majorization pair.
    Product(MajorizationPair),
}

fn parse_indices(text: &str) -> Result<Vec<usize>, String> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| format!("cannot parse index {tok:?}"))
        })
        .collect()
}

impl CriterionSpec {
    pub fn parse(id: &str) -> Result<Self, String> {
        if id == "K1" {
            return Ok(Self::Klyshko(1));
        }
        if let Some(rest) = id.strip_prefix("Kk:") {
            let k: usize = rest
                .parse()
                .map_err(|_| format!("bad Klyshko index in {id:?}"))?;
            if k < 1 {
                return Err(format!("{id:?}: Klyshko index must be >= 1"));
            }
            return Ok(Self::Klyshko(k));
        }
        if let Some(rest) = id.strip_prefix("Kinf:") {
            let n: usize = rest
                .parse()
                .map_err(|_| format!("bad tail index in {id:?}"))?;
            if n < 2 {
                return Err(format!("{id:?}: tail criterion needs N >= 2"));
            }
            return Ok(Self::Tail(n));
        }
        if let Some(rest) = id.strip_prefix("triple:") {
            let idx = parse_indices(rest).map_err(|e| format!("{id:?}: {e}"))?;
            if idx.len() != 3 {
                return Err(format!("{id:?}: triple needs exactly three indices"));
            }
            if !(idx[0] <= idx[1] && idx[1] <= idx[2]) {
                return Err(format!("{id:?}: triple indices must be non-decreasing"));
            }
            return Ok(Self::Triple(idx[0], idx[1], idx[2]));
        }
        if let Some(rest) = id.strip_prefix("maj:") {
            let Some((lo, hi)) = rest.split_once('|') else {
                return Err(format!("{id:?}: expected maj:<I>|<J>"));
            };
            let lower = IndexTuple::new(parse_indices(lo).map_err(|e| format!("{id:?}: {e}"))?);
            let upper = IndexTuple::new(parse_indices(hi).map_err(|e| format!("{id:?}: {e}"))?);
            let pair = MajorizationPair::new(lower, upper).map_err(|e| format!("{id:?}: {e}"))?;
            return Ok(Self::Product(pair));
        }
        Err(format!(
            "unrecognized criterion id {id:?} (expected K1, Kk:<k>, Kinf:<N>, triple:<n>,<m>,<k>, or maj:<I>|<J>)"
        ))
    }

    /// Canonical id, identical to the one its verdicts carry.
    pub fn id(&self) -> String {
        match self {
            Self::Klyshko(1) => "K1".to_string(),
            Self::Klyshko(k) => format!("Kk:{k}"),
            Self::Tail(n) => format!("Kinf:{n}"),
            Self::Triple(n, m, k) => format!("triple:{n},{m},{k}"),
            Self::Product(pair) => pair.id(),
        }
    }

    /// Number of probabilities `P_0..P_top` the criterion reads.
    pub fn min_len(&self) -> usize {
        1 + match self {
            Self::Klyshko(k) => k + 1,
            Self::Tail(n) => *n,
            Self::Triple(_, _, k) => *k,
            Self::Product(pair) => {
                let lo = pair.lower.entries().iter().copied().max().unwrap_or(0);
                let hi = pair.upper.entries().iter().copied().max().unwrap_or(0);
                lo.max(hi)
            }
        }
    }

    pub fn eval(&self, dist: &FockDistribution, tol: f64) -> fockcert::Result<CriterionVerdict> {
        match self {
            Self::Klyshko(k) => klyshko_with_tol(dist, *k, tol),
            Self::Tail(n) => k_infinity_with_tol(dist, *n, tol),
            Self::Triple(n, m, k) => triple_with_tol(dist, *n, *m, *k, tol),
            Self::Product(pair) => {
                evaluate_pair_with_tol(&dist.factorial_weights(), pair, tol)
            }
        }
    }
}
