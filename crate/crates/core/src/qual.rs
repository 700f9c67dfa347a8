//! Qualification domains: lattices with an attenuation operation.
//!
//! Two layers live here. [`QualificationDomain`] is the static interface,
//! implemented by [`Certainty`] (the unit interval with `min`/`max`/`×`) and
//! [`Product`] (componentwise structure over two factors). [`QualDomain`] is
//! the runtime-selected descriptor used by the parser, the transformer and the
//! CLI (`--qdom u|uxu`); it works on tagged [`QualValue`]s and reports shape
//! mismatches as [`QualError::Malformed`].
//!
//! Everything is generic over the scalar type through [`Real`], so the same
//! code runs on `f32` and `f64`.

use std::fmt::{self, Debug, Display};
use std::marker::PhantomData;

use num_traits::{Float, FromPrimitive};
use thiserror::Error;

/// Scalar types usable as certainty degrees.
pub trait Real: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Lossy conversion used when printing and when crossing into the
    /// `f64`-based constraint solver.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(Self::nan)
    }
}

impl<T> Real for T where T: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QualError {
    #[error("qualification value `{value}` does not conform to domain `{domain}`")]
    Malformed { value: String, domain: String },
    #[error("unknown qualification domain `{0}` (expected `u` or `uxu`)")]
    UnknownDomain(String),
}

/// Static interface of a qualification domain `⟨D, ⊑, ⊥, ⊤, ∘⟩`.
pub trait QualificationDomain {
    type Value: Clone + PartialEq + Debug;

    fn bottom(&self) -> Self::Value;
    fn top(&self) -> Self::Value;
    fn leq(&self, d: &Self::Value, e: &Self::Value) -> bool;
    fn glb(&self, d: &Self::Value, e: &Self::Value) -> Self::Value;
    fn lub(&self, d: &Self::Value, e: &Self::Value) -> Self::Value;
    fn attenuate(&self, d: &Self::Value, e: &Self::Value) -> Self::Value;

    /// Least `e` with `need ⊑ alpha ∘ e`, if any exists.
    fn residual(&self, need: &Self::Value, alpha: &Self::Value) -> Option<Self::Value>;

    fn glb_all<'a, I>(&self, values: I) -> Self::Value
    where
        I: IntoIterator<Item = &'a Self::Value>,
        Self::Value: 'a,
    {
        values
            .into_iter()
            .fold(self.top(), |acc, v| self.glb(&acc, v))
    }

    fn lt(&self, d: &Self::Value, e: &Self::Value) -> bool {
        self.leq(d, e) && d != e
    }
}

/// The certainty domain: `[0,1]` ordered numerically, attenuation is product.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Certainty<S>(PhantomData<S>);

impl<S> Certainty<S> {
    pub const fn new() -> Self {
        Certainty(PhantomData)
    }
}

/// Slack used when dividing back through an attenuation factor.
fn residual_slack<S: Real>() -> S {
    S::epsilon() * S::from_f64_lossy(16.0)
}

impl<S: Real> QualificationDomain for Certainty<S> {
    type Value = S;

    fn bottom(&self) -> S {
        S::zero()
    }

    fn top(&self) -> S {
        S::one()
    }

    fn leq(&self, d: &S, e: &S) -> bool {
        d <= e
    }

    fn glb(&self, d: &S, e: &S) -> S {
        d.min(*e)
    }

    fn lub(&self, d: &S, e: &S) -> S {
        d.max(*e)
    }

    fn attenuate(&self, d: &S, e: &S) -> S {
        *d * *e
    }

    fn residual(&self, need: &S, alpha: &S) -> Option<S> {
        if *need <= S::zero() {
            return Some(S::zero());
        }
        if *alpha <= S::zero() {
            return None;
        }
        let r = *need / *alpha;
        if r > S::one() + residual_slack::<S>() {
            None
        } else {
            Some(r.min(S::one()))
        }
    }
}

/// Cartesian product of two qualification domains.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Product<A, B>(pub A, pub B);

impl<A: QualificationDomain, B: QualificationDomain> QualificationDomain for Product<A, B> {
    type Value = (A::Value, B::Value);

    fn bottom(&self) -> Self::Value {
        (self.0.bottom(), self.1.bottom())
    }

    fn top(&self) -> Self::Value {
        (self.0.top(), self.1.top())
    }

    fn leq(&self, d: &Self::Value, e: &Self::Value) -> bool {
        self.0.leq(&d.0, &e.0) && self.1.leq(&d.1, &e.1)
    }

    fn glb(&self, d: &Self::Value, e: &Self::Value) -> Self::Value {
        (self.0.glb(&d.0, &e.0), self.1.glb(&d.1, &e.1))
    }

    fn lub(&self, d: &Self::Value, e: &Self::Value) -> Self::Value {
        (self.0.lub(&d.0, &e.0), self.1.lub(&d.1, &e.1))
    }

    fn attenuate(&self, d: &Self::Value, e: &Self::Value) -> Self::Value {
        (self.0.attenuate(&d.0, &e.0), self.1.attenuate(&d.1, &e.1))
    }

    fn residual(&self, need: &Self::Value, alpha: &Self::Value) -> Option<Self::Value> {
        Some((
            self.0.residual(&need.0, &alpha.0)?,
            self.1.residual(&need.1, &alpha.1)?,
        ))
    }
}

/// A qualification value of a runtime-selected domain.
#[derive(Clone, PartialEq)]
pub enum QualValue<S> {
    Real(S),
    Pair(Box<QualValue<S>>, Box<QualValue<S>>),
}

impl<S: Real> QualValue<S> {
    pub fn pair(left: QualValue<S>, right: QualValue<S>) -> Self {
        QualValue::Pair(Box::new(left), Box::new(right))
    }

    pub fn as_real(&self) -> Option<S> {
        match self {
            QualValue::Real(x) => Some(*x),
            QualValue::Pair(..) => None,
        }
    }

    /// Real components in left-to-right order.
    pub fn components(&self) -> Vec<S> {
        let mut out = Vec::new();
        self.collect_components(&mut out);
        out
    }

    fn collect_components(&self, out: &mut Vec<S>) {
        match self {
            QualValue::Real(x) => out.push(*x),
            QualValue::Pair(l, r) => {
                l.collect_components(out);
                r.collect_components(out);
            }
        }
    }

    pub fn to_f64(&self) -> QualValue<f64> {
        match self {
            QualValue::Real(x) => QualValue::Real(x.to_f64_lossy()),
            QualValue::Pair(l, r) => QualValue::pair(l.to_f64(), r.to_f64()),
        }
    }
}

impl<S: Display> Display for QualValue<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QualValue::Real(x) => write!(f, "{x}"),
            QualValue::Pair(l, r) => write!(f, "({l}, {r})"),
        }
    }
}

impl<S: Display> Debug for QualValue<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Display::fmt(self, f)
    }
}

/// Runtime-selected qualification domain: `U` or a binary product.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub enum QualDomain {
    #[default]
    U,
    Product(Box<QualDomain>, Box<QualDomain>),
}

impl Display for QualDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QualDomain::U => f.write_str("u"),
            QualDomain::Product(l, r) => match **r {
                QualDomain::Product(..) => write!(f, "{l}x({r})"),
                QualDomain::U => write!(f, "{l}x{r}"),
            },
        }
    }
}

impl std::str::FromStr for QualDomain {
    type Err = QualError;

    /// Accepts `u`, `uxu`, `uxuxu`, ... (products associate to the right).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let parts: Vec<&str> = lower.split('x').collect();
        if parts.is_empty() || parts.iter().any(|p| *p != "u") {
            return Err(QualError::UnknownDomain(s.to_string()));
        }
        let mut dom = QualDomain::U;
        for _ in 1..parts.len() {
            dom = QualDomain::Product(Box::new(QualDomain::U), Box::new(dom));
        }
        Ok(dom)
    }
}

impl QualDomain {
    pub fn product(left: QualDomain, right: QualDomain) -> Self {
        QualDomain::Product(Box::new(left), Box::new(right))
    }

    /// Number of real components of a value of this domain.
    pub fn width(&self) -> usize {
        match self {
            QualDomain::U => 1,
            QualDomain::Product(l, r) => l.width() + r.width(),
        }
    }

    pub fn conforms<S: Real>(&self, v: &QualValue<S>) -> bool {
        match (self, v) {
            (QualDomain::U, QualValue::Real(x)) => *x >= S::zero() && *x <= S::one(),
            (QualDomain::Product(dl, dr), QualValue::Pair(l, r)) => {
                dl.conforms(l) && dr.conforms(r)
            }
            _ => false,
        }
    }

    fn check<S: Real>(&self, v: &QualValue<S>) -> Result<(), QualError> {
        if self.conforms(v) {
            Ok(())
        } else {
            Err(QualError::Malformed {
                value: v.to_string(),
                domain: self.to_string(),
            })
        }
    }

    pub fn bottom<S: Real>(&self) -> QualValue<S> {
        match self {
            QualDomain::U => QualValue::Real(S::zero()),
            QualDomain::Product(l, r) => QualValue::pair(l.bottom(), r.bottom()),
        }
    }

    pub fn top<S: Real>(&self) -> QualValue<S> {
        match self {
            QualDomain::U => QualValue::Real(S::one()),
            QualDomain::Product(l, r) => QualValue::pair(l.top(), r.top()),
        }
    }

    pub fn extremes<S: Real>(&self) -> (QualValue<S>, QualValue<S>) {
        (self.bottom(), self.top())
    }

    /// Builds a value from its flattened real components.
    pub fn from_components<S: Real>(&self, comps: &[S]) -> Option<QualValue<S>> {
        if comps.len() != self.width() {
            return None;
        }
        Some(self.build_from(&mut comps.iter().copied()))
    }

    fn build_from<S: Real>(&self, it: &mut impl Iterator<Item = S>) -> QualValue<S> {
        match self {
            QualDomain::U => QualValue::Real(it.next().unwrap_or_else(S::zero)),
            QualDomain::Product(l, r) => {
                let lv = l.build_from(it);
                let rv = r.build_from(it);
                QualValue::pair(lv, rv)
            }
        }
    }

    /// Applies a binary operation on each pair of corresponding components.
    fn zip<S: Real>(
        &self,
        d: &QualValue<S>,
        e: &QualValue<S>,
        op: impl Fn(S, S) -> S,
    ) -> Result<QualValue<S>, QualError> {
        self.check(d)?;
        self.check(e)?;
        let out: Vec<S> = d
            .components()
            .into_iter()
            .zip(e.components())
            .map(|(a, b)| op(a, b))
            .collect();
        Ok(self.from_components(&out).expect("width checked"))
    }

    pub fn leq<S: Real>(&self, d: &QualValue<S>, e: &QualValue<S>) -> Result<bool, QualError> {
        self.check(d)?;
        self.check(e)?;
        Ok(d.components()
            .into_iter()
            .zip(e.components())
            .all(|(a, b)| a <= b))
    }

    /// `d ⊑ e` up to an absolute tolerance on each component.
    pub fn leq_approx<S: Real>(&self, d: &QualValue<S>, e: &QualValue<S>, tol: S) -> bool {
        self.conforms_shape(d)
            && self.conforms_shape(e)
            && d.components()
                .into_iter()
                .zip(e.components())
                .all(|(a, b)| a <= b + tol)
    }

    pub fn approx_eq<S: Real>(&self, d: &QualValue<S>, e: &QualValue<S>, tol: S) -> bool {
        self.leq_approx(d, e, tol) && self.leq_approx(e, d, tol)
    }

    fn conforms_shape<S: Real>(&self, v: &QualValue<S>) -> bool {
        match (self, v) {
            (QualDomain::U, QualValue::Real(_)) => true,
            (QualDomain::Product(dl, dr), QualValue::Pair(l, r)) => {
                dl.conforms_shape(l) && dr.conforms_shape(r)
            }
            _ => false,
        }
    }

    pub fn glb<S: Real>(&self, d: &QualValue<S>, e: &QualValue<S>) -> Result<QualValue<S>, QualError> {
        self.zip(d, e, |a, b| a.min(b))
    }

    pub fn lub<S: Real>(&self, d: &QualValue<S>, e: &QualValue<S>) -> Result<QualValue<S>, QualError> {
        self.zip(d, e, |a, b| a.max(b))
    }

    /// Greatest lower bound of a finite collection; `⊤` for the empty one.
    pub fn glb_all<'a, S: Real>(
        &self,
        values: impl IntoIterator<Item = &'a QualValue<S>>,
    ) -> Result<QualValue<S>, QualError> {
        values
            .into_iter()
            .try_fold(self.top(), |acc, v| self.glb(&acc, v))
    }

    pub fn attenuate<S: Real>(&self, d: &QualValue<S>, e: &QualValue<S>) -> Result<QualValue<S>, QualError> {
        self.zip(d, e, |a, b| a * b)
    }

    /// Least `e` such that `need ⊑ alpha ∘ e`; `None` when `need` exceeds what
    /// `alpha` can deliver.
    pub fn residual<S: Real>(&self, need: &QualValue<S>, alpha: &QualValue<S>) -> Option<QualValue<S>> {
        if !self.conforms_shape(need) || !self.conforms_shape(alpha) {
            return None;
        }
        let u = Certainty::<S>::new();
        let comps: Option<Vec<S>> = need
            .components()
            .into_iter()
            .zip(alpha.components())
            .map(|(n, a)| u.residual(&n, &a))
            .collect();
        self.from_components(&comps?)
    }

    pub fn is_bottom<S: Real>(&self, v: &QualValue<S>) -> bool {
        *v == self.bottom()
    }

    pub fn is_top<S: Real>(&self, v: &QualValue<S>) -> bool {
        *v == self.top()
    }

    /// Values usable as attenuation factors, thresholds and statement
    /// qualifications: every component strictly positive and at most one.
    /// For `U` this is exactly `D \ {⊥}`; for products it is the subset
    /// expressible by componentwise `qVal` constraints.
    pub fn is_usable<S: Real>(&self, v: &QualValue<S>) -> bool {
        self.conforms(v) && v.components().into_iter().all(|x| x > S::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> QualValue<f64> {
        QualValue::Real(x)
    }

    fn p(a: f64, b: f64) -> QualValue<f64> {
        QualValue::pair(r(a), r(b))
    }

    #[test]
    fn u_ordering_examples() {
        let u = QualDomain::U;
        assert!(u.leq(&r(0.3), &r(0.7)).unwrap());
        assert!(!u.leq(&r(1.0), &r(0.65)).unwrap());
    }

    #[test]
    fn product_ordering_is_componentwise() {
        let uxu: QualDomain = "uxu".parse().unwrap();
        let (a, b) = (p(0.3, 0.9), p(0.5, 0.9));
        let brute = a
            .components()
            .iter()
            .zip(b.components())
            .all(|(x, y)| *x <= y);
        assert_eq!(uxu.leq(&a, &b).unwrap(), brute);
        assert!(brute);
        assert!(!uxu.leq(&p(0.6, 0.1), &p(0.5, 0.9)).unwrap());
    }

    #[test]
    fn glb_lub_and_empty_glb() {
        let u = QualDomain::U;
        assert_eq!(u.glb(&r(0.3), &r(0.7)).unwrap(), r(0.3));
        assert_eq!(u.lub(&r(0.3), &r(0.7)).unwrap(), r(0.7));
        assert_eq!(u.glb_all::<f64>([]).unwrap(), r(1.0));
        let c = Certainty::<f64>::new();
        assert_eq!(c.glb_all([]), 1.0);
    }

    #[test]
    fn attenuation_examples() {
        let u = QualDomain::U;
        let v = u.attenuate(&r(0.9), &r(0.8)).unwrap().as_real().unwrap();
        assert!((v - 0.72).abs() < 1e-12);
        assert_eq!(u.attenuate(&r(0.7), &r(1.0)).unwrap(), r(0.7));
        assert_eq!(u.attenuate(&r(0.5), &r(0.0)).unwrap(), r(0.0));
    }

    #[test]
    fn extremes_of_nested_products() {
        assert_eq!(QualDomain::U.extremes::<f64>(), (r(0.0), r(1.0)));
        let uxu: QualDomain = "uxu".parse().unwrap();
        assert_eq!(uxu.extremes::<f64>(), (p(0.0, 0.0), p(1.0, 1.0)));
        let u3 = QualDomain::product(QualDomain::U, uxu);
        let (bot, top) = u3.extremes::<f64>();
        assert_eq!(bot, QualValue::pair(r(0.0), p(0.0, 0.0)));
        assert_eq!(top, QualValue::pair(r(1.0), p(1.0, 1.0)));
    }

    #[test]
    fn shape_mismatch_is_malformed() {
        let uxu: QualDomain = "uxu".parse().unwrap();
        assert!(matches!(
            uxu.leq(&r(0.3), &p(0.1, 0.2)),
            Err(QualError::Malformed { .. })
        ));
        assert!(QualDomain::U.glb(&r(1.5), &r(0.2)).is_err());
        assert!("v".parse::<QualDomain>().is_err());
    }

    #[test]
    fn residual_inverts_attenuation() {
        let u = QualDomain::U;
        assert_eq!(u.residual(&r(0.7), &r(0.7)), Some(r(1.0)));
        assert_eq!(u.residual(&r(0.75), &r(0.7)), None);
        let e = u.residual(&r(0.63), &r(0.9)).unwrap();
        assert!(u.leq_approx(&r(0.63), &u.attenuate(&r(0.9), &e).unwrap(), 1e-12));
    }

    #[test]
    fn domain_names_round_trip() {
        for name in ["u", "uxu", "uxuxu"] {
            let d: QualDomain = name.parse().unwrap();
            let again: QualDomain = d.to_string().replace(['(', ')'], "").parse().unwrap();
            assert_eq!(d, again);
        }
        assert_eq!("uxu".parse::<QualDomain>().unwrap().width(), 2);
    }
}
