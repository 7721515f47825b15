//! Continued fractions of `‖ξ‖`: canonical expansion, convergents,
//! semiconvergents and their approximation errors.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{format_rational, LatticePoint, Rational};
use crate::error::{Error, Result};

/// Distance from `xi` to the nearest integer.
pub fn normalize(xi: &Rational) -> Rational {
    let frac = xi - xi.floor();
    let other = Rational::one() - &frac;
    frac.min(other)
}

fn half() -> Rational {
    Rational::new(BigInt::one(), BigInt::from(2))
}

/// Value of `[0; a_1, …, a_k]`; the empty list gives `0`.
pub fn reconstruct(quotients: &[BigInt]) -> Rational {
    let mut acc = Rational::zero();
    for a in quotients.iter().rev() {
        acc = (Rational::from_integer(a.clone()) + acc).recip();
    }
    acc
}

/// Canonical simple continued fraction `[0; a_1, …, a_{s−1}]` of a number in `[0, 1/2]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CfExpansion {
    quotients: Vec<BigInt>,
    value: Rational,
}

impl CfExpansion {
    /// Euclidean expansion of `xi_norm ∈ [0, 1/2]`.
    pub fn expand(xi_norm: &Rational) -> Result<Self> {
        if xi_norm.is_negative() || *xi_norm > half() {
            return Err(Error::OutOfUnitHalf {
                value: format_rational(xi_norm),
            });
        }
        let mut num = xi_norm.numer().clone();
        let mut den = xi_norm.denom().clone();
        let mut quotients = Vec::new();
        while !num.is_zero() {
            let (a, r) = den.div_rem(&num);
            quotients.push(a);
            den = std::mem::replace(&mut num, r);
        }
        canonicalize(&mut quotients);
        Ok(Self {
            quotients,
            value: xi_norm.clone(),
        })
    }

    /// Builds the expansion from partial quotients, merging a trailing `1`.
    /// The resulting value must lie in `[0, 1/2]`.
    pub fn from_quotients(mut quotients: Vec<BigInt>) -> Result<Self> {
        for (i, a) in quotients.iter().enumerate() {
            if !a.is_positive() {
                return Err(Error::BadQuotient {
                    index: i + 1,
                    value: a.to_string(),
                });
            }
        }
        canonicalize(&mut quotients);
        let value = reconstruct(&quotients);
        if value > half() {
            return Err(Error::OutOfUnitHalf {
                value: format_rational(&value),
            });
        }
        Ok(Self { quotients, value })
    }

    /// `a_1, …, a_{s−1}`.
    pub fn quotients(&self) -> &[BigInt] {
        &self.quotients
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }

    /// Number of quotients plus one.
    pub fn s(&self) -> usize {
        self.quotients.len() + 1
    }

    /// `[0;a_1,…]` in the bracket notation used by the CLI.
    pub fn bracket(&self) -> String {
        let mut out = String::from("[0");
        for (i, a) in self.quotients.iter().enumerate() {
            out.push_str(if i == 0 { ";" } else { "," });
            out.push_str(&a.to_string());
        }
        out.push(']');
        out
    }
}

fn canonicalize(quotients: &mut Vec<BigInt>) {
    if quotients.len() >= 2 && quotients.last().is_some_and(|a| a.is_one()) {
        quotients.pop();
        if let Some(last) = quotients.last_mut() {
            *last += 1;
        }
    }
}

impl Serialize for CfExpansion {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("CfExpansion", 3)?;
        st.serialize_field("value", &format_rational(&self.value))?;
        st.serialize_field("s", &self.s())?;
        let qs: Vec<String> = self.quotients.iter().map(ToString::to_string).collect();
        st.serialize_field("quotients", &qs)?;
        st.end()
    }
}

/// `Q_n` for `n ≤ s`, where `Q_s` is unbounded for rational `ξ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QBound {
    Finite(BigInt),
    Unbounded,
}

/// Convergents `x_n = (Q_n, P_n)` and errors `Δ_n = |Q_nξ − P_n|` for `n = −1, …, s−1`.
#[derive(Clone, Debug)]
pub struct ConvergentTable {
    xi: Rational,
    quotients: Vec<BigInt>,
    // Offset by one so that n = −1 sits at index 0.
    points: Vec<LatticePoint>,
    deltas: Vec<Rational>,
}

impl ConvergentTable {
    pub fn new(cf: &CfExpansion) -> Self {
        let xi = cf.value().clone();
        let mut points = vec![LatticePoint::new(0, 1), LatticePoint::new(1, 0)];
        for a in cf.quotients() {
            let n = points.len();
            let (prev2, prev1) = (&points[n - 2], &points[n - 1]);
            let next = LatticePoint {
                q: &prev2.q + a * &prev1.q,
                p: &prev2.p + a * &prev1.p,
            };
            points.push(next);
        }
        let deltas = points.iter().map(|x| x.error(&xi)).collect();
        Self {
            xi,
            quotients: cf.quotients().to_vec(),
            points,
            deltas,
        }
    }

    pub fn xi(&self) -> &Rational {
        &self.xi
    }

    pub fn s(&self) -> usize {
        self.quotients.len() + 1
    }

    /// Index of the last convergent, `s − 1`.
    pub fn last(&self) -> isize {
        self.quotients.len() as isize
    }

    fn slot(&self, n: isize) -> usize {
        assert!(
            (-1..=self.last()).contains(&n),
            "convergent index {n} outside -1..={}",
            self.last()
        );
        (n + 1) as usize
    }

    /// `x_n` for `−1 ≤ n < s`. Panics outside that range.
    pub fn point(&self, n: isize) -> &LatticePoint {
        &self.points[self.slot(n)]
    }

    /// `Δ_n` for `−1 ≤ n < s`. Panics outside that range.
    pub fn delta(&self, n: isize) -> &Rational {
        &self.deltas[self.slot(n)]
    }

    /// `a_n` for `1 ≤ n < s`.
    pub fn quotient(&self, n: usize) -> Result<&BigInt> {
        self.check_interval_index(n)?;
        Ok(&self.quotients[n - 1])
    }

    /// `Q_n` for `−1 ≤ n ≤ s`.
    pub fn q_bound(&self, n: isize) -> Result<QBound> {
        if n == self.last() + 1 {
            Ok(QBound::Unbounded)
        } else if (-1..=self.last()).contains(&n) {
            Ok(QBound::Finite(self.point(n).q.clone()))
        } else {
            Err(Error::IndexOutOfRange {
                index: n as i64,
                lo: -1,
                hi: self.last() as i64 + 1,
            })
        }
    }

    pub(crate) fn check_interval_index(&self, n: usize) -> Result<()> {
        if n >= 1 && n < self.s() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: n as i64,
                lo: 1,
                hi: self.s() as i64 - 1,
            })
        }
    }

    /// `x_{n,t} = x_{n−2} + t·x_{n−1}` with `Δ_{n,t} = Δ_{n−2} − t·Δ_{n−1}`, for `t = 0..=a_n`.
    pub fn semiconvergents(&self, n: usize) -> Result<Vec<Semiconvergent>> {
        let a = self.quotient(n)?;
        let a = a.to_usize().ok_or_else(|| {
            Error::Precondition(format!(
                "partial quotient a_{n} = {a} is too large to enumerate"
            ))
        })?;
        let n_i = n as isize;
        let (x2, x1) = (self.point(n_i - 2), self.point(n_i - 1));
        let (d2, d1) = (self.delta(n_i - 2), self.delta(n_i - 1));
        Ok((0..=a)
            .map(|t| {
                let tb = BigInt::from(t);
                Semiconvergent {
                    n,
                    t,
                    point: LatticePoint {
                        q: &x2.q + &tb * &x1.q,
                        p: &x2.p + &tb * &x1.p,
                    },
                    delta: d2 - Rational::from_integer(tb) * d1,
                }
            })
            .collect())
    }

    /// Chains `Q_{n,0} = Q_{n−2} < Q_{n−1} ≤ Q_{n,1} < … < Q_{n,a_n} = Q_n` and
    /// `Δ_{n,a_n} = Δ_n < Δ_{n−1} ≤ Δ_{n,a_n−1} < … < Δ_{n,0} = Δ_{n−2}`,
    /// with `Q_{n,1} = Q_{n−1}` iff `n = 1` and `Δ_{n−1} = Δ_{n,a_n−1}` iff `n = s−1`.
    pub fn check_chains(&self, n: usize) -> Result<ChainReport> {
        let semis = self.semiconvergents(n)?;
        let n_i = n as isize;
        let a = semis.len() - 1;
        let q = |t: usize| &semis[t].point.q;
        let d = |t: usize| &semis[t].delta;
        let (q_prev2, q_prev1, q_n) = (
            &self.point(n_i - 2).q,
            &self.point(n_i - 1).q,
            &self.point(n_i).q,
        );
        let (d_prev2, d_prev1, d_n) = (self.delta(n_i - 2), self.delta(n_i - 1), self.delta(n_i));

        let mut failure = None;
        let mut fail = |msg: String| {
            if failure.is_none() {
                failure = Some(msg);
            }
        };
        if q(0) != q_prev2 {
            fail(format!(
                "Q_{{{n},0}} = {} != Q_{{{}}} = {q_prev2}",
                q(0),
                n_i - 2
            ));
        }
        if q_prev2 >= q_prev1 {
            fail(format!(
                "Q_{{{}}} = {q_prev2} >= Q_{{{}}} = {q_prev1}",
                n_i - 2,
                n_i - 1
            ));
        }
        if q_prev1 > q(1) {
            fail(format!(
                "Q_{{{}}} = {q_prev1} > Q_{{{n},1}} = {}",
                n_i - 1,
                q(1)
            ));
        }
        for t in 1..a {
            if q(t) >= q(t + 1) {
                fail(format!(
                    "Q_{{{n},{t}}} = {} >= Q_{{{n},{}}} = {}",
                    q(t),
                    t + 1,
                    q(t + 1)
                ));
            }
        }
        if q(a) != q_n {
            fail(format!("Q_{{{n},{a}}} = {} != Q_{n} = {q_n}", q(a)));
        }

        if d(a) != d_n {
            fail(format!("Δ_{{{n},{a}}} = {} != Δ_{n} = {d_n}", d(a)));
        }
        if d_n >= d_prev1 {
            fail(format!("Δ_{n} = {d_n} >= Δ_{{{}}} = {d_prev1}", n_i - 1));
        }
        if d_prev1 > d(a - 1) {
            fail(format!(
                "Δ_{{{}}} = {d_prev1} > Δ_{{{n},{}}} = {}",
                n_i - 1,
                a - 1,
                d(a - 1)
            ));
        }
        for t in 0..a.saturating_sub(1) {
            if d(t + 1) >= d(t) {
                fail(format!(
                    "Δ_{{{n},{}}} = {} >= Δ_{{{n},{t}}} = {}",
                    t + 1,
                    d(t + 1),
                    d(t)
                ));
            }
        }
        if d(0) != d_prev2 {
            fail(format!(
                "Δ_{{{n},0}} = {} != Δ_{{{}}} = {d_prev2}",
                d(0),
                n_i - 2
            ));
        }

        let q_equality = q(1) == q_prev1;
        let delta_equality = d(a - 1) == d_prev1;
        if q_equality != (n == 1) {
            fail(format!(
                "Q_{{{n},1}} = Q_{{{}}} is {q_equality}, expected {}",
                n_i - 1,
                n == 1
            ));
        }
        let last = n + 1 == self.s();
        if delta_equality != last {
            fail(format!(
                "Δ_{{{}}} = Δ_{{{n},{}}} is {delta_equality}, expected {last}",
                n_i - 1,
                a - 1
            ));
        }
        Ok(ChainReport {
            n,
            passed: failure.is_none(),
            q_equality,
            delta_equality,
            failure,
        })
    }
}

impl Serialize for ConvergentTable {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Row {
            n: isize,
            #[serde(rename = "Q")]
            q: String,
            #[serde(rename = "P")]
            p: String,
            delta: String,
        }
        let rows: Vec<Row> = (-1..=self.last())
            .map(|n| Row {
                n,
                q: self.point(n).q.to_string(),
                p: self.point(n).p.to_string(),
                delta: format_rational(self.delta(n)),
            })
            .collect();
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("ConvergentTable", 2)?;
        st.serialize_field("xi", &format_rational(&self.xi))?;
        st.serialize_field("convergents", &rows)?;
        st.end()
    }
}

/// `x_{n,t}` together with its error `Δ_{n,t}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Semiconvergent {
    pub n: usize,
    pub t: usize,
    pub point: LatticePoint,
    pub delta: Rational,
}

/// Outcome of the monotone-chain check for one `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub n: usize,
    pub passed: bool,
    /// `Q_{n,1} = Q_{n−1}`.
    pub q_equality: bool,
    /// `Δ_{n−1} = Δ_{n,a_n−1}`.
    pub delta_equality: bool,
    pub failure: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use proptest::prelude::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&a| BigInt::from(a)).collect()
    }

    fn table(num: i64, den: i64) -> ConvergentTable {
        ConvergentTable::new(&CfExpansion::expand(&rat(num, den)).unwrap())
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&rat(5, 1)), rat(0, 1));
        assert_eq!(normalize(&rat(10, 7)), rat(3, 7));
        assert_eq!(normalize(&rat(-4, 7)), rat(3, 7));
        assert_eq!(normalize(&rat(1, 2)), rat(1, 2));
        assert_eq!(normalize(&rat(-1, 2)), rat(1, 2));
        assert_eq!(normalize(&rat(355, 113)), rat(16, 113));
    }

    #[test]
    fn expand_examples() {
        let zero = CfExpansion::expand(&rat(0, 1)).unwrap();
        assert_eq!((zero.s(), zero.quotients()), (1, &[][..]));
        let half = CfExpansion::expand(&rat(1, 2)).unwrap();
        assert_eq!((half.s(), half.quotients()), (2, &big(&[2])[..]));
        let three_sevenths = CfExpansion::expand(&rat(3, 7)).unwrap();
        assert_eq!(
            (three_sevenths.s(), three_sevenths.quotients()),
            (3, &big(&[2, 3])[..])
        );
        assert_eq!(three_sevenths.bracket(), "[0;2,3]");
        assert_eq!(
            CfExpansion::expand(&rat(16, 113)).unwrap().quotients(),
            &big(&[7, 16])[..]
        );
    }

    #[test]
    fn expand_rejects_outside_unit_half() {
        assert!(CfExpansion::expand(&rat(4, 7)).is_err());
        assert!(CfExpansion::expand(&rat(-1, 7)).is_err());
    }

    #[test]
    fn from_quotients_merges_trailing_one() {
        let cf = CfExpansion::from_quotients(big(&[2, 2, 1])).unwrap();
        assert_eq!(cf.quotients(), &big(&[2, 3])[..]);
        assert_eq!(cf.value(), &rat(3, 7));
        assert!(CfExpansion::from_quotients(big(&[1, 2])).is_err());
        assert!(CfExpansion::from_quotients(big(&[2, 0])).is_err());
    }

    #[test]
    fn convergents_three_sevenths() {
        let t = table(3, 7);
        let pts: Vec<_> = (-1..=2).map(|n| t.point(n).clone()).collect();
        assert_eq!(
            pts,
            vec![
                LatticePoint::new(0, 1),
                LatticePoint::new(1, 0),
                LatticePoint::new(2, 1),
                LatticePoint::new(7, 3)
            ]
        );
        let deltas: Vec<_> = (-1..=2).map(|n| t.delta(n).clone()).collect();
        assert_eq!(deltas, vec![rat(1, 1), rat(3, 7), rat(1, 7), rat(0, 1)]);
        assert_eq!(t.q_bound(3).unwrap(), QBound::Unbounded);
        assert_eq!(t.q_bound(2).unwrap(), QBound::Finite(BigInt::from(7)));
        assert!(t.q_bound(4).is_err());
    }

    #[test]
    fn convergents_half_and_zero() {
        let t = table(1, 2);
        assert_eq!(t.point(1), &LatticePoint::new(2, 1));
        assert_eq!((t.delta(1), t.delta(0)), (&rat(0, 1), &rat(1, 2)));
        let t = table(0, 1);
        assert_eq!(
            (t.point(-1), t.point(0)),
            (&LatticePoint::new(0, 1), &LatticePoint::new(1, 0))
        );
        assert_eq!(t.delta(0), &rat(0, 1));
        assert_eq!(t.last(), 0);
    }

    #[test]
    fn semiconvergent_examples() {
        let t = table(3, 7);
        let s2 = t.semiconvergents(2).unwrap();
        let pts: Vec<_> = s2.iter().map(|s| s.point.clone()).collect();
        assert_eq!(
            pts,
            vec![
                LatticePoint::new(1, 0),
                LatticePoint::new(3, 1),
                LatticePoint::new(5, 2),
                LatticePoint::new(7, 3)
            ]
        );
        let ds: Vec<_> = s2.iter().map(|s| s.delta.clone()).collect();
        assert_eq!(ds, vec![rat(3, 7), rat(2, 7), rat(1, 7), rat(0, 1)]);

        let s1 = t.semiconvergents(1).unwrap();
        let pts: Vec<_> = s1.iter().map(|s| s.point.clone()).collect();
        assert_eq!(
            pts,
            vec![
                LatticePoint::new(0, 1),
                LatticePoint::new(1, 1),
                LatticePoint::new(2, 1)
            ]
        );
        let ds: Vec<_> = s1.iter().map(|s| s.delta.clone()).collect();
        assert_eq!(ds, vec![rat(1, 1), rat(4, 7), rat(1, 7)]);

        assert!(t.semiconvergents(0).is_err());
        assert!(t.semiconvergents(3).is_err());
    }

    #[test]
    fn chain_examples() {
        let t = table(3, 7);
        let r1 = t.check_chains(1).unwrap();
        assert!(r1.passed, "{r1:?}");
        assert!(r1.q_equality && !r1.delta_equality);
        let r2 = t.check_chains(2).unwrap();
        assert!(r2.passed, "{r2:?}");
        assert!(!r2.q_equality && r2.delta_equality);

        let t = table(2, 5);
        assert_eq!(t.s(), 3);
        assert!(t.check_chains(2).unwrap().passed);
        assert!(t.check_chains(1).unwrap().passed);
    }

    fn reduced_in_unit_half() -> impl Strategy<Value = Rational> {
        (1i64..5_000).prop_flat_map(|d| (0..=d / 2).prop_map(move |p| rat(p, d)))
    }

    proptest! {
        #[test]
        fn reconstruct_inverts_expand(x in reduced_in_unit_half()) {
            let cf = CfExpansion::expand(&x).unwrap();
            prop_assert_eq!(reconstruct(cf.quotients()), x);
            if cf.s() >= 2 {
                prop_assert!(cf.quotients()[0] >= BigInt::from(2));
                prop_assert!(*cf.quotients().last().unwrap() >= BigInt::from(2));
            }
        }

        #[test]
        fn convergent_facts_hold(x in reduced_in_unit_half()) {
            let t = ConvergentTable::new(&CfExpansion::expand(&x).unwrap());
            let last = t.last();
            for n in 0..=last {
                prop_assert!(t.point(n).q.is_positive());
                if n >= 1 {
                    prop_assert!(t.point(n).q > t.point(n - 1).q);
                }
                let det = t.point(n).det(t.point(n - 1));
                prop_assert_eq!(det, BigInt::from(if n % 2 == 0 { 1 } else { -1 }));
            }
            for n in 0..=last {
                prop_assert!(t.delta(n) < t.delta(n - 1));
            }
            prop_assert!(t.delta(last).is_zero());
        }

        #[test]
        fn semiconvergent_delta_linear_equals_direct(x in reduced_in_unit_half()) {
            let t = ConvergentTable::new(&CfExpansion::expand(&x).unwrap());
            for n in 1..t.s() {
                for sc in t.semiconvergents(n).unwrap() {
                    prop_assert_eq!(&sc.delta, &sc.point.error(&x));
                }
                prop_assert!(t.check_chains(n).unwrap().passed);
            }
        }
    }
}
