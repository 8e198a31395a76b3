//! Reduced multivariate polynomials over `F_d` or `Q`.
//!
//! Modular polynomials live in the function-space quotient: every exponent is
//! kept at most `d-1`, so two polynomials compare equal exactly when they
//! agree as functions on `(F_d)^n`. Rational polynomials are left unreduced.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::field::{CoeffDomain, FieldError, FieldSpec, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("coefficient domains differ ({0} vs {1})")]
    DomainMismatch(CoeffDomain, CoeffDomain),
    #[error("variable sets differ ({0} vs {1})")]
    VarSetMismatch(VarSet, VarSet),
    #[error("expected {expected} coordinates, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("enumeration needs {required} items, budget is {budget}")]
    BudgetExceeded { required: String, budget: u64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Ordered list of distinct variable names, sorted lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarSet(Arc<Vec<String>>);

impl VarSet {
    pub fn new<I, S>(names: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut names: Vec<String> = names.into_iter().map(Into::into).collect();
        names.sort();
        for w in names.windows(2) {
            if w[0] == w[1] {
                return Err(PolyError::DuplicateVariable(w[0].clone()));
            }
        }
        Ok(VarSet(Arc::new(names)))
    }

    pub fn empty() -> Self {
        VarSet(Arc::new(Vec::new()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        let mut names: Vec<String> = self.0.iter().chain(other.0.iter()).cloned().collect();
        names.sort();
        names.dedup();
        VarSet(Arc::new(names))
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.join(", "))
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Exponent vector, one entry per variable of the owning [`VarSet`].
///
/// Ordered graded-lexicographically: total degree first, then the exponent
/// of the first variable, and so on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `x^d = x` on `F_d`: any exponent `e >= d` becomes `((e-1) mod (d-1)) + 1`.
    fn reduced(mut self, domain: CoeffDomain) -> Monomial {
        if let CoeffDomain::Modular(f) = domain {
            let d = f.modulus() as u32;
            for e in self.0.iter_mut() {
                if *e >= d {
                    *e = (*e - 1) % (d - 1) + 1;
                }
            }
        }
        self
    }

    fn eval(&self, domain: CoeffDomain, point: &[Rational]) -> Rational {
        let mut acc = Rational::one();
        for (e, x) in self.0.iter().zip(point) {
            for _ in 0..*e {
                acc = domain.mul(&acc, x);
            }
        }
        acc
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiPoly {
    domain: CoeffDomain,
    vars: VarSet,
    terms: BTreeMap<Monomial, Rational>,
}

impl MultiPoly {
    pub fn zero(domain: CoeffDomain, vars: &VarSet) -> Self {
        MultiPoly { domain, vars: vars.clone(), terms: BTreeMap::new() }
    }

    pub fn one(domain: CoeffDomain, vars: &VarSet) -> Self {
        Self::constant(domain, vars, &Rational::one()).expect("1 exists in every domain")
    }

    pub fn constant(domain: CoeffDomain, vars: &VarSet, c: &Rational) -> Result<Self, PolyError> {
        Self::from_terms(domain, vars, [(vec![0; vars.len()], c.clone())])
    }

    pub fn var(domain: CoeffDomain, vars: &VarSet, name: &str) -> Result<Self, PolyError> {
        let i = vars.index_of(name).ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        Self::from_terms(domain, vars, [(e, Rational::one())])
    }

    /// Build from raw `(exponents, coefficient)` pairs; coefficients are
    /// normalized into the domain, exponents reduced, like terms combined.
    pub fn from_terms<I>(domain: CoeffDomain, vars: &VarSet, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut p = MultiPoly::zero(domain, vars);
        for (e, c) in terms {
            if e.len() != vars.len() {
                return Err(PolyError::ArityMismatch { expected: vars.len(), got: e.len() });
            }
            let c = domain.normalize(&c)?;
            p.add_term(Monomial(e).reduced(domain), c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let domain = self.domain;
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = domain.add(existing, &c);
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn domain(&self) -> CoeffDomain {
        self.domain
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    /// Terms in descending monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter().rev()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Rational {
        self.terms.get(&Monomial(exponents.to_vec())).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_value(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next()?;
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m.0[var]).max().unwrap_or(0)
    }

    /// Indices of the variables that actually occur.
    pub fn support(&self) -> Vec<usize> {
        (0..self.vars.len()).filter(|&i| self.degree_in(i) > 0).collect()
    }

    fn compatible(&self, other: &MultiPoly) -> Result<(), PolyError> {
        if self.domain != other.domain {
            return Err(PolyError::DomainMismatch(self.domain, other.domain));
        }
        if self.vars != other.vars {
            return Err(PolyError::VarSetMismatch(self.vars.clone(), other.vars.clone()));
        }
        Ok(())
    }

    pub fn add(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.compatible(other)?;
        let mut out = MultiPoly::zero(self.domain, &self.vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb).reduced(self.domain), self.domain.mul(ca, cb));
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> MultiPoly {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), self.domain.neg(c))).collect();
        MultiPoly { domain: self.domain, vars: self.vars.clone(), terms }
    }

    pub fn scale(&self, k: &Rational) -> Result<MultiPoly, PolyError> {
        let k = self.domain.normalize(k)?;
        let mut out = MultiPoly::zero(self.domain, &self.vars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), self.domain.mul(c, &k));
        }
        Ok(out)
    }

    pub fn add_constant(&self, k: &Rational) -> Result<MultiPoly, PolyError> {
        self.add(&MultiPoly::constant(self.domain, &self.vars, k)?)
    }

    pub fn pow(&self, exp: u32) -> MultiPoly {
        let mut acc = MultiPoly::one(self.domain, &self.vars);
        for _ in 0..exp {
            acc = acc.mul(self).expect("same ring");
        }
        acc
    }

    pub fn eval(&self, point: &[Rational]) -> Result<Rational, PolyError> {
        if point.len() != self.vars.len() {
            return Err(PolyError::ArityMismatch { expected: self.vars.len(), got: point.len() });
        }
        let point: Vec<Rational> =
            point.iter().map(|x| self.domain.normalize(x)).collect::<Result<_, _>>()?;
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            acc = self.domain.add(&acc, &self.domain.mul(c, &m.eval(self.domain, &point)));
        }
        Ok(acc)
    }

    /// Substitute values for some variables; the result keeps the same
    /// variable set with the substituted variables no longer occurring.
    pub fn substitute(&self, assignment: &[Option<Rational>]) -> Result<MultiPoly, PolyError> {
        if assignment.len() != self.vars.len() {
            return Err(PolyError::ArityMismatch { expected: self.vars.len(), got: assignment.len() });
        }
        let assignment: Vec<Option<Rational>> = assignment
            .iter()
            .map(|a| a.as_ref().map(|x| self.domain.normalize(x)).transpose())
            .collect::<Result<_, _>>()?;
        let mut out = MultiPoly::zero(self.domain, &self.vars);
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut exps = m.0.clone();
            for (i, a) in assignment.iter().enumerate() {
                if let Some(x) = a {
                    for _ in 0..exps[i] {
                        coeff = self.domain.mul(&coeff, x);
                    }
                    exps[i] = 0;
                }
            }
            out.add_term(Monomial(exps), coeff);
        }
        Ok(out)
    }

    /// Re-express over another variable set. Every variable that occurs must
    /// exist in `target`.
    pub fn rebase(&self, target: &VarSet) -> Result<MultiPoly, PolyError> {
        let mut map = Vec::with_capacity(self.vars.len());
        for (i, name) in self.vars.names().iter().enumerate() {
            match target.index_of(name) {
                Some(j) => map.push(Some(j)),
                None if self.degree_in(i) == 0 => map.push(None),
                None => return Err(PolyError::UnknownVariable(name.clone())),
            }
        }
        let mut out = MultiPoly::zero(self.domain, target);
        for (m, c) in &self.terms {
            let mut e = vec![0; target.len()];
            for (i, j) in map.iter().enumerate() {
                if let Some(j) = j {
                    e[*j] = m.0[i];
                }
            }
            out.add_term(Monomial(e), c.clone());
        }
        Ok(out)
    }

    /// Coefficients `[c0, c1, ...]` in the single variable `var`, provided no
    /// other variable occurs.
    pub fn univariate_coefficients(&self, var: usize) -> Option<Vec<Rational>> {
        let mut coeffs = vec![Rational::zero(); self.degree_in(var) as usize + 1];
        for (m, c) in &self.terms {
            if m.0.iter().enumerate().any(|(i, &e)| i != var && e > 0) {
                return None;
            }
            coeffs[m.0[var] as usize] = c.clone();
        }
        Some(coeffs)
    }

    /// Coefficient vector along `basis` (monomials absent from the basis must
    /// not occur).
    pub fn coefficients_along(&self, basis: &[Monomial]) -> Option<Vec<Rational>> {
        if self.terms.keys().any(|m| !basis.contains(m)) {
            return None;
        }
        Some(basis.iter().map(|m| self.terms.get(m).cloned().unwrap_or_else(Rational::zero)).collect())
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, vars: &VarSet, m: &Monomial) -> fmt::Result {
    let mut first = true;
    for (name, &e) in vars.names().iter().zip(m.exponents()) {
        if e == 0 {
            continue;
        }
        if !first {
            write!(f, "*")?;
        }
        first = false;
        if e == 1 {
            write!(f, "{name}")?;
        } else {
            write!(f, "{name}^{e}")?;
        }
    }
    Ok(())
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                write_monomial(f, &self.vars, m)?;
            }
        }
        Ok(())
    }
}

/// Number of reduced polynomials in `F_d[x_1..x_n]`, i.e. `d^(d^n)`, if it
/// fits in a `u64`.
pub fn ring_size(d: u64, n: usize) -> Option<u64> {
    let monomials = d.checked_pow(u32::try_from(n).ok()?)?;
    d.checked_pow(u32::try_from(monomials).ok()?)
}

/// All `d^n` tuples over `{d-1, ..., 1, 0}` in lexicographic order of that
/// descending alphabet: for `d = 2, n = 2` this is `(1,1), (1,0), (0,1), (0,0)`.
pub fn descending_tuples(d: u64, n: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * d as usize);
        for prefix in &out {
            for v in (0..d).rev() {
                let mut t = prefix.clone();
                t.push(v);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// The monomial vector `t = (t_1, ..., t_{d^n})` whose exponents are the
/// descending index vectors; for `d = 2` over `(x, y)` this is `(xy, x, y, 1)`.
pub fn monomial_basis(d: u64, n: usize) -> Vec<Monomial> {
    descending_tuples(d, n)
        .into_iter()
        .map(|t| Monomial(t.into_iter().map(|e| e as u32).collect()))
        .collect()
}

/// The `index`-th polynomial of the ring enumeration: the base-`d` digits of
/// `index`, most significant first, are the coefficients along
/// [`monomial_basis`].
pub fn ring_element(field: FieldSpec, vars: &VarSet, basis: &[Monomial], index: u64) -> MultiPoly {
    let d = field.modulus();
    let domain = CoeffDomain::Modular(field);
    let mut p = MultiPoly::zero(domain, vars);
    let mut rest = index;
    for m in basis.iter().rev() {
        let c = rest % d;
        rest /= d;
        if c != 0 {
            p.terms.insert(m.clone(), Rational::integer(c as i64));
        }
    }
    p
}

/// Stream of every reduced polynomial of `F_d[vars]`, ordered by coefficient
/// tuple (lexicographic over the monomial basis).
pub struct RingIter {
    field: FieldSpec,
    vars: VarSet,
    basis: Vec<Monomial>,
    next: u64,
    total: u64,
}

impl Iterator for RingIter {
    type Item = MultiPoly;

    fn next(&mut self) -> Option<MultiPoly> {
        if self.next >= self.total {
            return None;
        }
        let p = ring_element(self.field, &self.vars, &self.basis, self.next);
        self.next += 1;
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for RingIter {}

pub fn enumerate_ring(field: FieldSpec, vars: &VarSet, budget: u64) -> Result<RingIter, PolyError> {
    let d = field.modulus();
    let total = checked_ring_size(d, vars.len(), budget)?;
    Ok(RingIter { field, vars: vars.clone(), basis: monomial_basis(d, vars.len()), next: 0, total })
}

pub(crate) fn checked_ring_size(d: u64, n: usize, budget: u64) -> Result<u64, PolyError> {
    match ring_size(d, n) {
        Some(total) if total <= budget => Ok(total),
        Some(total) => Err(PolyError::BudgetExceeded { required: total.to_string(), budget }),
        None => Err(PolyError::BudgetExceeded { required: format!("{d}^({d}^{n})"), budget }),
    }
}
