//! Partial order on exponent tuples and the generalized product criteria
//! `prod Q_I <= prod Q_J`.
//!
//! A tuple `J = (J_1, ..., J_s)` names the product `Q_{J_1} ... Q_{J_s}` of
//! factorial weights. When `I` is majorized by `J` (every prefix sum of the
//! sorted tuples satisfies `sum_i I <= sum_i J`, with equal totals), every
//! classical state obeys `prod Q_I <= prod Q_J`, so a strict excess on the
//! left certifies nonclassicality.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::criteria::{violation_with_tol, CriterionVerdict, VIOLATION_TOL};
use crate::dist::FactorialWeights;
use crate::error::{Error, Result};

/// Exponent tuple, stored sorted in non-increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexTuple {
    entries: Vec<usize>,
}

impl IndexTuple {
    pub fn new(mut entries: Vec<usize>) -> Self {
        entries.sort_unstable_by(|a, b| b.cmp(a));
        Self { entries }
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn total(&self) -> usize {
        self.entries.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries without trailing zeros.
    fn significant(&self) -> &[usize] {
        let mut end = self.entries.len();
        while end > 0 && self.entries[end - 1] == 0 {
            end -= 1;
        }
        &self.entries[..end]
    }
}

/// Outcome of a prefix-sum comparison between equal-total tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TupleOrder {
    Equal,
    LessEq,
    GreaterEq,
    Incomparable,
}

/// Majorization comparison: `LessEq` iff every prefix sum of `i` is at most
/// the corresponding prefix sum of `j` (tuples zero-padded to equal length).
pub fn compare(i: &IndexTuple, j: &IndexTuple) -> Result<TupleOrder> {
    let (ti, tj) = (i.total(), j.total());
    if ti != tj {
        return Err(Error::UnequalTotals { left: ti, right: tj });
    }
    let len = i.len().max(j.len());
    let entry = |t: &IndexTuple, idx: usize| t.entries().get(idx).copied().unwrap_or(0);
    let (mut pi, mut pj) = (0usize, 0usize);
    let (mut le, mut ge) = (true, true);
    for idx in 0..len {
        pi += entry(i, idx);
        pj += entry(j, idx);
        if pi > pj {
            le = false;
        }
        if pi < pj {
            ge = false;
        }
    }
    Ok(match (le, ge) {
        (true, true) => TupleOrder::Equal,
        (true, false) => TupleOrder::LessEq,
        (false, true) => TupleOrder::GreaterEq,
        (false, false) => TupleOrder::Incomparable,
    })
}

/// A strict majorization relation `lower < upper` naming the criterion
/// `prod Q_lower <= prod Q_upper`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MajorizationPair {
    pub lower: IndexTuple,
    pub upper: IndexTuple,
}

impl MajorizationPair {
    /// Validates that `lower` is strictly majorized by `upper`.
    pub fn new(lower: IndexTuple, upper: IndexTuple) -> Result<Self> {
        match compare(&lower, &upper)? {
            TupleOrder::LessEq => Ok(Self { lower, upper }),
            order => Err(Error::Precondition(format!(
                "{:?} vs {:?}: need strict LessEq, got {order:?}",
                lower.entries(),
                upper.entries()
            ))),
        }
    }

    /// Criterion identifier, e.g. `maj:1,1|2,0`. Trailing zeros common to
    /// both tuples are dropped, so zero-padded copies share one identifier.
    pub fn id(&self) -> String {
        let lo = self.lower.significant();
        let hi = self.upper.significant();
        let keep = lo.len().max(hi.len()).max(1);
        let fmt = |e: &[usize]| {
            (0..keep)
                .map(|i| e.get(i).copied().unwrap_or(0).to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "maj:{}|{}",
            fmt(self.lower.entries()),
            fmt(self.upper.entries())
        )
    }

    /// Serialization as `{"I": [..], "J": [..]}`.
    pub fn to_json(&self) -> String {
        let fmt = |e: &[usize]| {
            e.iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        format!(
            "{{\"I\":[{}],\"J\":[{}]}}",
            fmt(self.lower.entries()),
            fmt(self.upper.entries())
        )
    }
}

/// A pair produced by [`enumerate_pairs`], flagged when the relation is a
/// covering one (no third tuple fits strictly between the two).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumeratedPair {
    pub pair: MajorizationPair,
    pub covering: bool,
}

/// All strict majorization pairs of length-`s` tuples with entries in
/// `0..=n_max`, grouped by total and sorted lexicographically by
/// `(total, lower, upper)`.
pub fn enumerate_pairs(n_max: usize, s: usize) -> Result<Arc<Vec<EnumeratedPair>>> {
    if s < 2 {
        return Err(Error::ParameterDomain {
            name: "s",
            value: s as f64,
            requirement: ">= 2",
        });
    }
    if n_max < 1 {
        return Err(Error::ParameterDomain {
            name: "n_max",
            value: n_max as f64,
            requirement: ">= 1",
        });
    }
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Vec<EnumeratedPair>>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(found) = cache.lock().unwrap().get(&(n_max, s)) {
        return Ok(Arc::clone(found));
    }

    // Non-increasing length-s tuples with entries in 0..=n_max, grouped by
    // total. Tuples are generated in ascending lexicographic order.
    let mut by_total: Vec<Vec<IndexTuple>> = vec![Vec::new(); n_max * s + 1];
    let mut stack = vec![0usize; s];
    fn descend(
        stack: &mut Vec<usize>,
        depth: usize,
        s: usize,
        hi: usize,
        by_total: &mut [Vec<IndexTuple>],
    ) {
        if depth == s {
            let tuple = IndexTuple::new(stack.clone());
            by_total[tuple.total()].push(tuple);
            return;
        }
        for v in 0..=hi {
            stack[depth] = v;
            descend(stack, depth + 1, s, v, by_total);
        }
    }
    descend(&mut stack, 0, s, n_max, &mut by_total);

    let mut out = Vec::new();
    for group in by_total.iter_mut() {
        group.sort();
        for (a, lower) in group.iter().enumerate() {
            for upper in group.iter().skip(a + 1) {
                // Groups are lexicographically sorted and lex order extends
                // majorization here, so only (earlier, later) can be LessEq.
                let forward = compare(lower, upper).expect("equal totals within group");
                let (lower, upper) = match forward {
                    TupleOrder::LessEq => (lower, upper),
                    TupleOrder::GreaterEq => (upper, lower),
                    _ => continue,
                };
                let covering = !group.iter().any(|mid| {
                    mid != lower
                        && mid != upper
                        && compare(lower, mid).unwrap() == TupleOrder::LessEq
                        && compare(mid, upper).unwrap() == TupleOrder::LessEq
                });
                out.push(EnumeratedPair {
                    pair: MajorizationPair {
                        lower: lower.clone(),
                        upper: upper.clone(),
                    },
                    covering,
                });
            }
        }
    }
    out.sort_by(|x, y| {
        (x.pair.lower.total(), &x.pair.lower, &x.pair.upper).cmp(&(
            y.pair.lower.total(),
            &y.pair.lower,
            &y.pair.upper,
        ))
    });
    let out = Arc::new(out);
    cache
        .lock()
        .unwrap()
        .insert((n_max, s), Arc::clone(&out));
    Ok(out)
}

/// Product of factorial weights over the tuple entries, in stored order.
pub fn product(q: &FactorialWeights, tuple: &IndexTuple) -> Result<f64> {
    let mut acc = 1.0;
    for &k in tuple.entries() {
        acc *= q.get(k)?;
    }
    Ok(acc)
}

/// The same product computed through summed logarithms; requires strictly
/// positive weights. Exposed for cross-checking long products.
pub fn product_log(q: &FactorialWeights, tuple: &IndexTuple) -> Result<f64> {
    let mut acc = 0.0;
    for &k in tuple.entries() {
        let v = q.get(k)?;
        if v <= 0.0 {
            return Err(Error::Precondition(format!(
                "log-domain product needs positive weights, Q_{k} = {v}"
            )));
        }
        acc += v.ln();
    }
    Ok(acc.exp())
}

/// Evaluate `prod Q_lower - prod Q_upper`; a strictly positive margin
/// (beyond the shared tolerance) certifies nonclassicality.
pub fn evaluate_pair(q: &FactorialWeights, pair: &MajorizationPair) -> Result<CriterionVerdict> {
    evaluate_pair_with_tol(q, pair, VIOLATION_TOL)
}

/// [`evaluate_pair`] under a caller-chosen violation tolerance.
pub fn evaluate_pair_with_tol(
    q: &FactorialWeights,
    pair: &MajorizationPair,
    tol: f64,
) -> Result<CriterionVerdict> {
    let lhs = product(q, &pair.lower)?;
    let rhs = product(q, &pair.upper)?;
    let margin = lhs - rhs;
    Ok(CriterionVerdict {
        id: pair.id(),
        margin,
        violated: violation_with_tol(margin, rhs, tol),
        diverged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{coherent_dist, fock_dist, mix, thermal_dist};
    use rand::{Rng, SeedableRng};

    fn tup(e: &[usize]) -> IndexTuple {
        IndexTuple::new(e.to_vec())
    }

    fn pair(lo: &[usize], hi: &[usize]) -> MajorizationPair {
        MajorizationPair::new(tup(lo), tup(hi)).unwrap()
    }

    #[test]
    fn compare_reference_cases() {
        assert_eq!(compare(&tup(&[1, 1]), &tup(&[2, 0])).unwrap(), TupleOrder::LessEq);
        assert_eq!(
            compare(&tup(&[2, 2, 2, 0]), &tup(&[3, 1, 1, 1])).unwrap(),
            TupleOrder::Incomparable
        );
        assert_eq!(
            compare(&tup(&[3, 0, 0]), &tup(&[3, 0, 0])).unwrap(),
            TupleOrder::Equal
        );
        assert_eq!(compare(&tup(&[2, 0]), &tup(&[1, 1])).unwrap(), TupleOrder::GreaterEq);
        // Zero padding is implicit: (2,1) vs (1,1,1) have equal totals.
        assert_eq!(
            compare(&tup(&[2, 1]), &tup(&[1, 1, 1])).unwrap(),
            TupleOrder::GreaterEq
        );
        assert!(matches!(
            compare(&tup(&[1, 1]), &tup(&[3, 0])),
            Err(Error::UnequalTotals { left: 2, right: 3 })
        ));
    }

    #[test]
    fn compare_is_a_partial_order_on_equal_totals() {
        // Exhaustive check over all length-4 tuples with entries <= 4, total 6.
        let mut tuples = Vec::new();
        for a in 0..=4usize {
            for b in 0..=a {
                for c in 0..=b {
                    for d in 0..=c {
                        if a + b + c + d == 6 {
                            tuples.push(tup(&[a, b, c, d]));
                        }
                    }
                }
            }
        }
        for x in &tuples {
            assert_eq!(compare(x, x).unwrap(), TupleOrder::Equal);
            for y in &tuples {
                let xy = compare(x, y).unwrap();
                let yx = compare(y, x).unwrap();
                // Antisymmetry.
                match xy {
                    TupleOrder::Equal => assert_eq!(yx, TupleOrder::Equal),
                    TupleOrder::LessEq => assert_eq!(yx, TupleOrder::GreaterEq),
                    TupleOrder::GreaterEq => assert_eq!(yx, TupleOrder::LessEq),
                    TupleOrder::Incomparable => assert_eq!(yx, TupleOrder::Incomparable),
                }
                if xy != TupleOrder::LessEq && xy != TupleOrder::Equal {
                    continue;
                }
                // Transitivity of <=.
                for z in &tuples {
                    let yz = compare(y, z).unwrap();
                    if yz == TupleOrder::LessEq || yz == TupleOrder::Equal {
                        let xz = compare(x, z).unwrap();
                        assert!(
                            xz == TupleOrder::LessEq || xz == TupleOrder::Equal,
                            "{:?} <= {:?} <= {:?} but compare gave {xz:?}",
                            x.entries(),
                            y.entries(),
                            z.entries()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn enumerate_smallest_case_is_the_single_pair() {
        let pairs = enumerate_pairs(2, 2).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].pair.lower.entries(), &[1, 1]);
        assert_eq!(pairs[0].pair.upper.entries(), &[2, 0]);
        assert!(pairs[0].covering);
    }

    #[test]
    fn enumerate_total_three_chain() {
        let pairs = enumerate_pairs(3, 3).unwrap();
        let total3: Vec<_> = pairs
            .iter()
            .filter(|p| p.pair.lower.total() == 3)
            .collect();
        assert_eq!(total3.len(), 3);
        let find = |lo: &[usize], hi: &[usize]| {
            total3
                .iter()
                .find(|p| p.pair.lower.entries() == lo && p.pair.upper.entries() == hi)
                .unwrap_or_else(|| panic!("missing pair {lo:?} < {hi:?}"))
        };
        assert!(find(&[1, 1, 1], &[2, 1, 0]).covering);
        assert!(find(&[2, 1, 0], &[3, 0, 0]).covering);
        assert!(!find(&[1, 1, 1], &[3, 0, 0]).covering);
    }

    #[test]
    fn enumerate_total_four_chain_of_length_four_tuples() {
        // The total-4 slice is a chain:
        // (1,1,1,1) < (2,1,1,0) < (2,2,0,0) < (3,1,0,0) < (4,0,0,0).
        let pairs = enumerate_pairs(4, 4).unwrap();
        let total4: Vec<_> = pairs
            .iter()
            .filter(|p| p.pair.lower.total() == 4)
            .collect();
        let chain: [&[usize]; 5] = [
            &[1, 1, 1, 1],
            &[2, 1, 1, 0],
            &[2, 2, 0, 0],
            &[3, 1, 0, 0],
            &[4, 0, 0, 0],
        ];
        // All 10 ordered pairs from the chain are present; exactly the 4
        // adjacent ones are covering.
        assert_eq!(total4.len(), 10);
        for (i, lo) in chain.iter().enumerate() {
            for hi in chain.iter().skip(i + 1) {
                let found = total4
                    .iter()
                    .find(|p| p.pair.lower.entries() == *lo && p.pair.upper.entries() == *hi)
                    .unwrap_or_else(|| panic!("missing {lo:?} < {hi:?}"));
                assert_eq!(
                    found.covering,
                    chain.iter().position(|c| c == hi).unwrap() == i + 1,
                    "covering flag wrong for {lo:?} < {hi:?}"
                );
            }
        }
        // Output is sorted by (total, lower, upper).
        for w in pairs.windows(2) {
            let a = (&w[0].pair.lower.total(), &w[0].pair.lower, &w[0].pair.upper);
            let b = (&w[1].pair.lower.total(), &w[1].pair.lower, &w[1].pair.upper);
            assert!(a < b);
        }
    }

    #[test]
    fn pair_ids_and_json() {
        let p = pair(&[1, 1], &[2, 0]);
        assert_eq!(p.id(), "maj:1,1|2,0");
        assert_eq!(p.to_json(), "{\"I\":[1,1],\"J\":[2,0]}");
        // Zero-padded copies share the identifier.
        let padded = pair(&[1, 1, 0], &[2, 0, 0]);
        assert_eq!(padded.id(), "maj:1,1|2,0");
        assert_eq!(padded.to_json(), "{\"I\":[1,1,0],\"J\":[2,0,0]}");
        // But genuinely significant zeros survive.
        let q = pair(&[2, 1, 0], &[3, 0, 0]);
        assert_eq!(q.id(), "maj:2,1|3,0");
        assert!(MajorizationPair::new(tup(&[2, 0]), tup(&[1, 1])).is_err());
        assert!(MajorizationPair::new(tup(&[1, 1]), tup(&[1, 1])).is_err());
    }

    #[test]
    fn evaluate_reference_margins() {
        // Coherent weights are constant (Q_k = e^{-1}), so both products agree.
        let coh = coherent_dist(1.0, 4).unwrap().factorial_weights();
        for item in enumerate_pairs(3, 3).unwrap().iter() {
            let v = evaluate_pair(&coh, &item.pair).unwrap();
            assert!(v.margin.abs() <= 1e-16, "{}: {}", v.id, v.margin);
            assert!(!v.violated);
        }

        let one = fock_dist(1, 2).unwrap().factorial_weights();
        let v = evaluate_pair(&one, &pair(&[1, 1], &[2, 0])).unwrap();
        assert_eq!(v.margin, 1.0);
        assert!(v.violated);
        assert!(!v.diverged);

        let th = thermal_dist(1.0, 2).unwrap().factorial_weights();
        let v = evaluate_pair(&th, &pair(&[1, 1], &[2, 0])).unwrap();
        assert_eq!(v.margin, 1.0 / 16.0 - 1.0 / 8.0);
        assert!(!v.violated);

        // Missing index: Q only defined through k = 2.
        assert!(evaluate_pair(&th, &pair(&[2, 1], &[3, 0])).is_err());
    }

    #[test]
    fn classical_mixtures_never_violate_product_criteria() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x6d61_6a6f);
        let pairs = enumerate_pairs(6, 4).unwrap();
        for _ in 0..10_000 {
            let n_parts = rng.gen_range(1..=10);
            let mut weights: Vec<f64> = (0..n_parts).map(|_| rng.gen_range(0.0..1.0)).collect();
            let total: f64 = weights.iter().sum();
            for w in weights.iter_mut() {
                *w /= total;
            }
            let parts: Vec<_> = weights
                .into_iter()
                .map(|w| (w, coherent_dist(rng.gen_range(0.0..10.0), 6).unwrap()))
                .collect();
            let q = mix(&parts).unwrap().factorial_weights();
            for item in pairs.iter() {
                let v = evaluate_pair(&q, &item.pair).unwrap();
                assert!(!v.violated, "{} margin {}", v.id, v.margin);
            }
        }
    }

    #[test]
    fn log_domain_products_agree_with_direct() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let pairs = enumerate_pairs(5, 4).unwrap();
        for _ in 0..200 {
            let mu = rng.gen_range(0.05..8.0);
            let lam = rng.gen_range(0.0..6.0);
            let parts = [
                (0.5, coherent_dist(mu, 6).unwrap()),
                (0.5, coherent_dist(lam, 6).unwrap()),
            ];
            let q = mix(&parts).unwrap().factorial_weights();
            for item in pairs.iter() {
                for tuple in [&item.pair.lower, &item.pair.upper] {
                    let direct = product(&q, tuple).unwrap();
                    let vialog = product_log(&q, tuple).unwrap();
                    assert!(
                        (direct - vialog).abs() <= 1e-10 * direct.abs(),
                        "{:?}: {direct} vs {vialog}",
                        tuple.entries()
                    );
                }
            }
        }
    }
}
