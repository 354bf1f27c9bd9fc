//! Sparse multivariate polynomials over the rationals.
//!
//! Variables are [`Atom`]s. Two multiplication models coexist:
//!
//! * [`Poly::mul`] merges exponential atoms (`exp(a)·exp(b) = exp(a+b)`), which is
//!   the model used by expression arithmetic;
//! * the `*_raw` routines treat every atom as an independent indeterminate. The
//!   gcd and exact division work in this free model; any identity that holds in
//!   the free ring also holds after merging, so cancelling a free-model gcd is
//!   always sound.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use super::atom::Atom;
use super::{Expr, Rational};

/// A power product of atoms, sorted by atom, exponents strictly positive.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(Atom, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn atom(a: Atom, e: u32) -> Self {
        if e == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(a, e)])
        }
    }

    pub fn factors(&self) -> &[(Atom, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, a: &Atom) -> u32 {
        self.0
            .binary_search_by(|(b, _)| b.cmp(a))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub(crate) fn from_sorted(v: Vec<(Atom, u32)>) -> Self {
        Monomial(v)
    }

    /// Product treating every atom as an independent indeterminate.
    pub fn mul_raw(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// Quotient if `other` divides `self` in the free model.
    pub fn div_raw(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (a, e) in &self.0 {
            if j < other.0.len() && &other.0[j].0 < a {
                return None;
            }
            if j < other.0.len() && &other.0[j].0 == a {
                let f = other.0[j].1;
                j += 1;
                if f > *e {
                    return None;
                }
                if f < *e {
                    out.push((a.clone(), e - f));
                }
            } else {
                out.push((a.clone(), *e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        for (a, e) in &self.0 {
            let f = other.exponent(a);
            if f > 0 {
                out.push((a.clone(), (*e).min(f)));
            }
        }
        Monomial(out)
    }

    /// Removes `a` entirely, returning the remaining monomial and the exponent.
    pub fn split_off(&self, a: &Atom) -> (Monomial, u32) {
        let mut e = 0;
        let rest = self
            .0
            .iter()
            .filter(|(b, f)| {
                if b == a {
                    e = *f;
                    false
                } else {
                    true
                }
            })
            .cloned()
            .collect();
        (Monomial(rest), e)
    }

    /// Collapses all exponential factors into a single `exp` atom. Returns `None`
    /// for the exponential part when the merged argument vanishes.
    fn merge_exps(self) -> Monomial {
        let n_exp = self.0.iter().filter(|(a, _)| matches!(a, Atom::Exp(_))).count();
        let needs = n_exp > 1 || self.0.iter().any(|(a, e)| matches!(a, Atom::Exp(_)) && *e > 1);
        if !needs {
            return self;
        }
        let mut arg = Expr::zero();
        let mut rest = Vec::with_capacity(self.0.len());
        for (a, e) in self.0 {
            match a {
                Atom::Exp(g) => arg = &arg + &(&g * &Expr::int(e as i64)),
                other => rest.push((other, e)),
            }
        }
        if !arg.is_zero_literal() {
            let ea = Atom::Exp(arg);
            let pos = rest.partition_point(|(b, _)| b < &ea);
            rest.insert(pos, (ea, 1));
        }
        Monomial(rest)
    }
}

/// A polynomial: map from monomial to nonzero rational coefficient.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn from_atom(a: Atom) -> Self {
        Poly::from_term(Monomial::atom(a, 1), Rational::one())
    }

    pub fn from_term(m: Monomial, c: Rational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// Leading term with respect to the internal monomial order.
    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> Rational {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(Rational::zero)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (mut big, small) = if self.len() >= other.len() {
            (self.clone(), other)
        } else {
            (other.clone(), self)
        };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    /// Product in the free model.
    pub fn mul_raw(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul_raw(m2), c1 * c2);
            }
        }
        out
    }

    /// Product with exponential merging.
    pub fn mul(&self, other: &Poly) -> Poly {
        self.mul_raw(other).merge_exps()
    }

    pub fn mul_monomial_raw(&self, m: &Monomial) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(k, c)| (k.mul_raw(m), c.clone())).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn merge_exps(self) -> Poly {
        let needs = self.terms.keys().any(|m| {
            m.0.iter()
                .filter(|(a, _)| matches!(a, Atom::Exp(_)))
                .map(|(_, e)| *e)
                .sum::<u32>()
                > 1
        });
        if !needs {
            return self;
        }
        let mut out = Poly::zero();
        for (m, c) in self.terms {
            out.add_term(m.merge_exps(), c);
        }
        out
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut s = BTreeSet::new();
        for m in self.terms.keys() {
            for (a, _) in &m.0 {
                s.insert(a.clone());
            }
        }
        s
    }

    pub fn max_atom(&self) -> Option<Atom> {
        self.terms
            .keys()
            .filter_map(|m| m.0.last().map(|(a, _)| a))
            .max()
            .cloned()
    }

    pub fn degree_in(&self, a: &Atom) -> u32 {
        self.terms.keys().map(|m| m.exponent(a)).max().unwrap_or(0)
    }

    /// Coefficients with respect to `a`; keys are exponents.
    pub fn coeffs_in(&self, a: &Atom) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (rest, e) = m.split_off(a);
            out.entry(e).or_default().add_term(rest, c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// Gcd of all monomials (the largest monomial dividing every term).
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Monomial::one();
        };
        let mut g = first.clone();
        for m in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    pub fn div_monomial_raw(&self, m: &Monomial) -> Option<Poly> {
        let mut out = BTreeMap::new();
        for (k, c) in &self.terms {
            out.insert(k.div_raw(m)?, c.clone());
        }
        Some(Poly { terms: out })
    }

    /// Scales so that the leading coefficient is one.
    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let lc = self.leading_coeff();
        self.scale(&lc.recip())
    }

    /// Largest total degree among the terms.
    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Rational content: gcd of numerators over lcm of denominators, sign of
    /// the leading coefficient.
    pub fn rational_content(&self) -> Rational {
        use num_integer::Integer;
        let mut num = num_bigint::BigInt::zero();
        let mut den = num_bigint::BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            return Rational::one();
        }
        let r = Rational::new(num, den);
        if self.leading_coeff().is_negative() {
            -r
        } else {
            r
        }
    }
}

// ---------------------------------------------------------------------------
// Free-model gcd and exact division

type Univariate = Vec<Poly>;

fn to_univariate(p: &Poly, v: &Atom) -> Univariate {
    let cs = p.coeffs_in(v);
    let deg = cs.keys().next_back().copied().unwrap_or(0) as usize;
    let mut out = vec![Poly::zero(); deg + 1];
    for (e, c) in cs {
        out[e as usize] = c;
    }
    trim(&mut out);
    out
}

fn from_univariate(u: &Univariate, v: &Atom) -> Poly {
    let mut out = Poly::zero();
    for (e, c) in u.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let m = Monomial::atom(v.clone(), e as u32);
        for (k, q) in &c.terms {
            out.add_term(k.mul_raw(&m), q.clone());
        }
    }
    out
}

fn trim(u: &mut Univariate) {
    while u.len() > 1 && u.last().is_some_and(|c| c.is_zero()) {
        u.pop();
    }
    if u.is_empty() {
        u.push(Poly::zero());
    }
}

fn uni_is_zero(u: &Univariate) -> bool {
    u.iter().all(|c| c.is_zero())
}

fn uni_deg(u: &Univariate) -> usize {
    u.len() - 1
}

/// Exact quotient `a / b` in the free model, `None` when `b` does not divide `a`.
pub fn div_exact(a: &Poly, b: &Poly) -> Option<Poly> {
    if b.is_zero() {
        return None;
    }
    if a.is_zero() {
        return Some(Poly::zero());
    }
    if let Some(c) = b.as_constant() {
        return Some(a.scale(&c.recip()));
    }
    if b.is_monomial() {
        let (m, c) = b.leading().unwrap();
        return a.div_monomial_raw(m).map(|q| q.scale(&c.recip()));
    }
    let v = b.max_atom().unwrap();
    if a.degree_in(&v) < b.degree_in(&v) {
        return None;
    }
    let ub = to_univariate(b, &v);
    let mut ua = to_univariate(a, &v);
    let db = uni_deg(&ub);
    let lcb = ub[db].clone();
    let mut q: Univariate = vec![Poly::zero(); uni_deg(&ua) - db + 1];
    while !uni_is_zero(&ua) && uni_deg(&ua) >= db {
        let da = uni_deg(&ua);
        let c = div_exact(&ua[da], &lcb)?;
        let shift = da - db;
        for (i, bc) in ub.iter().enumerate() {
            if !bc.is_zero() {
                ua[i + shift] = ua[i + shift].sub(&c.mul_raw(bc));
            }
        }
        q[shift] = q[shift].add(&c);
        trim(&mut ua);
        if uni_deg(&ua) == da && !ua[da].is_zero() {
            return None;
        }
    }
    if !uni_is_zero(&ua) {
        return None;
    }
    trim(&mut q);
    Some(from_univariate(&q, &v))
}

/// Monic gcd in the free model.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.as_constant().is_some() || b.as_constant().is_some() {
        return Poly::one();
    }
    if a == b {
        return a.monic();
    }
    let ca = a.monomial_content();
    let cb = b.monomial_content();
    let cm = ca.gcd(&cb);
    if a.is_monomial() || b.is_monomial() {
        return Poly::from_term(cm, Rational::one());
    }
    let a1 = a.div_monomial_raw(&ca).unwrap();
    let b1 = b.div_monomial_raw(&cb).unwrap();
    if coprime_by_images(&a1, &b1) {
        return Poly::from_term(cm, Rational::one());
    }
    let g = gcd_primitive(&a1, &b1);
    g.mul_monomial_raw(&cm).monic()
}

/// Sufficient test for gcd(a, b) = 1. For every shared atom `v` the other
/// atoms are replaced by integers; when neither leading coefficient in `v`
/// vanishes, the degree in `v` of the image gcd bounds that of the true gcd.
fn coprime_by_images(a: &Poly, b: &Poly) -> bool {
    let atoms_a = a.atoms();
    let atoms_b = b.atoms();
    let shared: Vec<&Atom> = atoms_a.intersection(&atoms_b).collect();
    if shared.is_empty() {
        return true;
    }
    let all: Vec<&Atom> = atoms_a.union(&atoms_b).collect();
    'var: for v in shared {
        for attempt in 0..3i64 {
            let value = |x: &Atom| {
                let i = all.iter().position(|y| *y == x).unwrap() as i64;
                Rational::from_integer(((i * 37 + attempt * 101 + 11) % 47 - 23).into())
            };
            let (ia, ib) = (image(a, v, &value), image(b, v, &value));
            if ia.len() != a.degree_in(v) as usize + 1 || ib.len() != b.degree_in(v) as usize + 1 {
                continue;
            }
            if rational_uni_gcd_degree(ia, ib) == 0 {
                continue 'var;
            }
            return false;
        }
        return false;
    }
    true
}

/// Coefficients in `v` after substituting `value` for every other atom,
/// trimmed of vanishing leading terms.
fn image(p: &Poly, v: &Atom, value: &dyn Fn(&Atom) -> Rational) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); p.degree_in(v) as usize + 1];
    for (m, c) in p.terms() {
        let mut term = c.clone();
        let mut e = 0;
        for (a, k) in m.factors() {
            if a == v {
                e = *k as usize;
            } else {
                term *= num_traits::pow(value(a), *k as usize);
            }
        }
        out[e] += term;
    }
    while out.len() > 1 && out.last().is_some_and(|c| c.is_zero()) {
        out.pop();
    }
    out
}

fn rational_uni_gcd_degree(mut a: Vec<Rational>, mut b: Vec<Rational>) -> usize {
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !(b.len() == 1 && b[0].is_zero()) {
        // a mod b
        let lb = b.last().unwrap().clone();
        while a.len() >= b.len() && !(a.len() == 1 && a[0].is_zero()) {
            let k = a.last().unwrap() / &lb;
            let shift = a.len() - b.len();
            for (i, c) in b.iter().enumerate() {
                a[i + shift] -= &k * c;
            }
            a.pop();
            while a.len() > 1 && a.last().is_some_and(|c| c.is_zero()) {
                a.pop();
            }
            if a.is_empty() {
                a.push(Rational::zero());
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len() - 1
}

fn gcd_primitive(a: &Poly, b: &Poly) -> Poly {
    if a.as_constant().is_some() || b.as_constant().is_some() {
        return Poly::one();
    }
    if a.is_monomial() || b.is_monomial() {
        return Poly::from_term(a.monomial_content().gcd(&b.monomial_content()), Rational::one());
    }
    let va = a.max_atom().unwrap();
    let vb = b.max_atom().unwrap();
    let v = va.clone().max(vb.clone());
    let da = a.degree_in(&v);
    let db = b.degree_in(&v);
    if da == 0 {
        return gcd_with_coeffs(a, b, &v);
    }
    if db == 0 {
        return gcd_with_coeffs(b, a, &v);
    }
    if let Some(g) = divides(a, b) {
        return g;
    }
    let ua = to_univariate(a, &v);
    let ub = to_univariate(b, &v);
    let conta = uni_content(&ua);
    let contb = uni_content(&ub);
    let gc = gcd(&conta, &contb);
    let mut p = uni_div_scalar(&ua, &conta);
    let mut q = uni_div_scalar(&ub, &contb);
    if uni_deg(&p) < uni_deg(&q) {
        std::mem::swap(&mut p, &mut q);
    }
    loop {
        let r = prem(&p, &q);
        if uni_is_zero(&r) {
            break;
        }
        if uni_deg(&r) == 0 {
            q = vec![Poly::one()];
            break;
        }
        let cr = uni_content(&r);
        let r = uni_div_scalar(&r, &cr);
        p = q;
        q = r;
    }
    let g = from_univariate(&q, &v);
    g.mul_raw(&gc).monic()
}

/// gcd(a, p) when `a` is free of `v`: fold over the coefficients of `p`
/// starting from `a`, which usually collapses to 1 after a few steps.
fn gcd_with_coeffs(a: &Poly, p: &Poly, v: &Atom) -> Poly {
    let mut coeffs: Vec<Poly> = p.coeffs_in(v).into_values().collect();
    coeffs.sort_by_key(|c| c.len());
    let mut g = a.monic();
    for c in &coeffs {
        g = gcd(&g, c);
        if g.as_constant().is_some() {
            return Poly::one();
        }
    }
    g
}

/// The smaller operand when it divides the larger one.
fn divides(a: &Poly, b: &Poly) -> Option<Poly> {
    let (small, big) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    div_exact(big, small).map(|_| small.monic())
}

fn uni_content(u: &Univariate) -> Poly {
    let mut g = Poly::zero();
    for c in u {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, c);
        if g.is_one() {
            break;
        }
    }
    g
}

fn uni_div_scalar(u: &Univariate, c: &Poly) -> Univariate {
    u.iter()
        .map(|x| div_exact(x, c).expect("content divides every coefficient"))
        .collect()
}

fn prem(p: &Univariate, q: &Univariate) -> Univariate {
    let dq = uni_deg(q);
    let lcq = &q[dq];
    let mut r = p.clone();
    while !uni_is_zero(&r) && uni_deg(&r) >= dq {
        let dr = uni_deg(&r);
        let lcr = r[dr].clone();
        let shift = dr - dq;
        for c in r.iter_mut() {
            *c = c.mul_raw(lcq);
        }
        for (i, qc) in q.iter().enumerate() {
            if !qc.is_zero() {
                r[i + shift] = r[i + shift].sub(&lcr.mul_raw(qc));
            }
        }
        // cancel the common rational content to limit coefficient growth
        trim(&mut r);
        if uni_deg(&r) == dr && !r[dr].is_zero() {
            // leading term did not cancel (cannot happen over a domain)
            r[dr] = Poly::zero();
            trim(&mut r);
        }
        let k = r.iter().filter(|c| !c.is_zero()).fold(None::<Rational>, |acc, c| {
            let rc = c.rational_content().abs();
            Some(match acc {
                None => rc,
                Some(a) => rational_gcd(&a, &rc),
            })
        });
        if let Some(k) = k {
            if !k.is_zero() && !k.is_one() {
                let inv = k.recip();
                for c in r.iter_mut() {
                    *c = c.scale(&inv);
                }
            }
        }
    }
    r
}

fn rational_gcd(a: &Rational, b: &Rational) -> Rational {
    use num_integer::Integer;
    Rational::new(a.numer().gcd(b.numer()), a.denom().lcm(b.denom()))
}
