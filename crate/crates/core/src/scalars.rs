//! Exact arithmetic in the rational function field `Q(q)`.
//!
//! A [`RatQ`] is stored as a reduced fraction of integer polynomials in `q`
//! (coefficients in ascending degree). The representation is canonical, so
//! structural equality is field equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("evaluation at a pole (q = {0})")]
    Pole(String),
}

#[cold]
fn overflow() -> ! {
    panic!("coefficient overflow in Q(q) arithmetic")
}

fn trim(v: &mut Vec<i128>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn padd(a: &[i128], b: &[i128]) -> Vec<i128> {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut out = long.to_vec();
    for (o, s) in out.iter_mut().zip(short) {
        *o = o.checked_add(*s).unwrap_or_else(|| overflow());
    }
    trim(&mut out);
    out
}

fn pneg(a: &[i128]) -> Vec<i128> {
    a.iter().map(|c| c.checked_neg().unwrap_or_else(|| overflow())).collect()
}

fn pmul(a: &[i128], b: &[i128]) -> Vec<i128> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            let p = x.checked_mul(*y).unwrap_or_else(|| overflow());
            out[i + j] = out[i + j].checked_add(p).unwrap_or_else(|| overflow());
        }
    }
    trim(&mut out);
    out
}

fn pscale_div(a: &mut [i128], c: i128) {
    if c != 1 {
        for x in a.iter_mut() {
            *x /= c;
        }
    }
}

fn content(a: &[i128]) -> i128 {
    let mut g: i128 = 0;
    for c in a {
        g = g.gcd(c);
        if g == 1 {
            break;
        }
    }
    g
}

fn ord(a: &[i128]) -> usize {
    a.iter().position(|c| *c != 0).unwrap_or(0)
}

/// Exact division `a / b` in `Z[q]`; the caller guarantees divisibility.
fn pdivexact(a: &[i128], b: &[i128]) -> Vec<i128> {
    if a.is_empty() {
        return Vec::new();
    }
    let db = b.len() - 1;
    let lb = b[db];
    let mut r = a.to_vec();
    let mut out = vec![0i128; a.len() - db];
    for k in (0..out.len()).rev() {
        let c = r[k + db];
        if c == 0 {
            continue;
        }
        debug_assert_eq!(c % lb, 0);
        let t = c / lb;
        out[k] = t;
        for (j, y) in b.iter().enumerate() {
            let p = t.checked_mul(*y).unwrap_or_else(|| overflow());
            r[k + j] = r[k + j].checked_sub(p).unwrap_or_else(|| overflow());
        }
    }
    debug_assert!(r.iter().all(|c| *c == 0));
    trim(&mut out);
    out
}

fn generic_primitive<T: Clone + Integer + Signed>(a: &mut [T]) {
    let mut g = T::zero();
    for c in a.iter() {
        g = g.gcd(c);
    }
    if !g.is_zero() && !g.is_one() {
        for c in a.iter_mut() {
            *c = c.clone() / g.clone();
        }
    }
}

fn generic_trim<T: Zero>(a: &mut Vec<T>) {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
}

/// Primitive polynomial remainder sequence. Returns `None` on coefficient
/// overflow so the caller can retry with wider integers.
fn prs_gcd<T>(a: &[T], b: &[T]) -> Option<Vec<T>>
where
    T: Clone + Integer + Signed + num_traits::CheckedMul + num_traits::CheckedSub,
{
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    generic_primitive(&mut a);
    generic_primitive(&mut b);
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        if b.is_empty() {
            break;
        }
        if b.len() == 1 {
            return Some(vec![T::one()]);
        }
        let db = b.len() - 1;
        let lb = b[db].clone();
        while a.len() > db {
            let da = a.len() - 1;
            let la = a[da].clone();
            let shift = da - db;
            for c in a.iter_mut() {
                *c = c.checked_mul(&lb)?;
            }
            for (j, y) in b.iter().enumerate() {
                let p = la.checked_mul(y)?;
                a[shift + j] = a[shift + j].checked_sub(&p)?;
            }
            generic_trim(&mut a);
            generic_primitive(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    if a.last().is_some_and(|c| c.is_negative()) {
        for c in a.iter_mut() {
            *c = -c.clone();
        }
    }
    Some(a)
}

/// Primitive gcd with positive leading coefficient; both inputs nonzero.
fn pgcd(a: &[i128], b: &[i128]) -> Vec<i128> {
    let oa = ord(a);
    let ob = ord(b);
    let shift = oa.min(ob);
    let a = &a[oa..];
    let b = &b[ob..];
    let core = if a.len() == 1 || b.len() == 1 {
        vec![1]
    } else {
        match prs_gcd(a, b) {
            Some(g) => g,
            None => {
                let ba: Vec<BigInt> = a.iter().map(|c| BigInt::from(*c)).collect();
                let bb: Vec<BigInt> = b.iter().map(|c| BigInt::from(*c)).collect();
                let g = prs_gcd(&ba, &bb).expect("bigint arithmetic does not overflow");
                g.iter()
                    .map(|c| c.to_i128().unwrap_or_else(|| overflow()))
                    .collect()
            }
        }
    };
    let mut out = vec![0i128; shift];
    out.extend(core);
    out
}

/// An element of `Q(q)` in canonical form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatQ {
    num: Vec<i128>,
    den: Vec<i128>,
}

impl RatQ {
    pub fn zero() -> Self {
        RatQ { num: Vec::new(), den: vec![1] }
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn int(n: i64) -> Self {
        if n == 0 {
            return Self::zero();
        }
        RatQ { num: vec![n as i128], den: vec![1] }
    }

    pub fn ratio(n: i64, d: i64) -> Result<Self, ScalarError> {
        if d == 0 {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::from_parts(vec![n as i128], vec![d as i128]))
    }

    pub fn q() -> Self {
        Self::q_pow(1)
    }

    /// `q^k` for any integer `k`.
    pub fn q_pow(k: i32) -> Self {
        let mut v = vec![0i128; k.unsigned_abs() as usize + 1];
        v[k.unsigned_abs() as usize] = 1;
        if k >= 0 {
            RatQ { num: v, den: vec![1] }
        } else {
            RatQ { num: vec![1], den: v }
        }
    }

    /// `nu = q - q^-1`.
    pub fn nu() -> Self {
        RatQ { num: vec![-1, 0, 1], den: vec![0, 1] }
    }

    /// The quantum integer `[n]_q = (q^n - q^-n) / (q - q^-1)`.
    pub fn qint(n: i32) -> Self {
        let mut acc = Self::zero();
        let m = n.abs();
        for k in 0..m {
            acc += &Self::q_pow(m - 1 - 2 * k);
        }
        if n < 0 {
            -acc
        } else {
            acc
        }
    }

    /// Builds a canonical value from an arbitrary numerator/denominator pair.
    ///
    /// Panics if `den` is the zero polynomial.
    pub fn from_parts(mut num: Vec<i128>, mut den: Vec<i128>) -> Self {
        trim(&mut num);
        trim(&mut den);
        assert!(!den.is_empty(), "zero denominator");
        if num.is_empty() {
            return Self::zero();
        }
        let mut r = RatQ { num, den };
        r.canonicalize();
        r
    }

    fn canonicalize(&mut self) {
        if self.num.is_empty() {
            self.den = vec![1];
            return;
        }
        if self.den.len() > 1 || self.den[0] != 1 {
            let g = pgcd(&self.num, &self.den);
            if g.len() > 1 {
                self.num = pdivexact(&self.num, &g);
                self.den = pdivexact(&self.den, &g);
            }
        }
        let c = content(&self.num).gcd(&content(&self.den));
        let c = if *self.den.last().unwrap() < 0 { -c } else { c };
        pscale_div(&mut self.num, c);
        pscale_div(&mut self.den, c);
    }

    pub fn numer(&self) -> &[i128] {
        &self.num
    }

    pub fn denom(&self) -> &[i128] {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.num.len() == 1 && self.den.len() == 1 && self.num[0] == 1 && self.den[0] == 1
    }

    /// Returns `Some((c, k))` when the value is `c * q^k` for an integer `c`.
    pub fn as_signed_monomial(&self) -> Option<(i128, i32)> {
        let nz: Vec<usize> = (0..self.num.len()).filter(|&i| self.num[i] != 0).collect();
        let dz: Vec<usize> = (0..self.den.len()).filter(|&i| self.den[i] != 0).collect();
        if nz.len() != 1 || dz.len() != 1 || self.den[dz[0]] != 1 {
            return None;
        }
        Some((self.num[nz[0]], nz[0] as i32 - dz[0] as i32))
    }

    /// Returns the integer value if this is a constant integer.
    pub fn as_integer(&self) -> Option<i128> {
        match (self.num.len(), self.den.as_slice()) {
            (0, _) => Some(0),
            (1, [1]) => Some(self.num[0]),
            _ => None,
        }
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let mut r = RatQ { num: self.den.clone(), den: self.num.clone() };
        if *r.den.last().unwrap() < 0 {
            r.num = pneg(&r.num);
            r.den = pneg(&r.den);
        }
        Ok(r)
    }

    pub fn try_div(&self, other: &Self) -> Result<Self, ScalarError> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, e: i32) -> Result<Self, ScalarError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one();
        let mut b = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &b;
            }
            k >>= 1;
            if k > 0 {
                b = &b * &b;
            }
        }
        Ok(acc)
    }

    /// Evaluates at a rational point.
    pub fn eval(&self, x: &BigRational) -> Result<BigRational, ScalarError> {
        let horner = |p: &[i128]| {
            let mut acc = BigRational::zero();
            for c in p.iter().rev() {
                acc = acc * x + BigRational::from_integer(BigInt::from(*c));
            }
            acc
        };
        let d = horner(&self.den);
        if d.is_zero() {
            return Err(ScalarError::Pole(x.to_string()));
        }
        Ok(horner(&self.num) / d)
    }

    /// Substitutes `q -> q^-1`.
    pub fn bar(&self) -> Self {
        let mut n = self.num.clone();
        let mut d = self.den.clone();
        let m = n.len().max(d.len());
        n.resize(m, 0);
        d.resize(m, 0);
        n.reverse();
        d.reverse();
        Self::from_parts(n, d)
    }

    fn den_is_monomial(&self) -> Option<(i128, usize)> {
        let o = ord(&self.den);
        if o + 1 == self.den.len() {
            Some((self.den[o], o))
        } else {
            None
        }
    }
}

impl Default for RatQ {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for RatQ {
    fn from(n: i64) -> Self {
        Self::int(n)
    }
}

impl Add for &RatQ {
    type Output = RatQ;
    fn add(self, o: &RatQ) -> RatQ {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            let num = padd(&self.num, &o.num);
            return RatQ::from_parts(num, self.den.clone());
        }
        let num = padd(&pmul(&self.num, &o.den), &pmul(&o.num, &self.den));
        let den = pmul(&self.den, &o.den);
        RatQ::from_parts(num, den)
    }
}

impl Neg for &RatQ {
    type Output = RatQ;
    fn neg(self) -> RatQ {
        RatQ { num: pneg(&self.num), den: self.den.clone() }
    }
}

impl Neg for RatQ {
    type Output = RatQ;
    fn neg(mut self) -> RatQ {
        self.num = pneg(&self.num);
        self
    }
}

impl Sub for &RatQ {
    type Output = RatQ;
    fn sub(self, o: &RatQ) -> RatQ {
        self + &(-o)
    }
}

impl Mul for &RatQ {
    type Output = RatQ;
    fn mul(self, o: &RatQ) -> RatQ {
        if self.is_zero() || o.is_zero() {
            return RatQ::zero();
        }
        if self.is_one() {
            return o.clone();
        }
        if o.is_one() {
            return self.clone();
        }
        // Laurent fast path: both denominators are monomials, so the only
        // possible cancellation is a power of q or an integer.
        if let (Some(_), Some(_)) = (self.den_is_monomial(), o.den_is_monomial()) {
            return RatQ::from_parts(pmul(&self.num, &o.num), pmul(&self.den, &o.den));
        }
        let g1 = pgcd(&self.num, &o.den);
        let g2 = pgcd(&o.num, &self.den);
        let (an, bd) = if g1.len() > 1 {
            (pdivexact(&self.num, &g1), pdivexact(&o.den, &g1))
        } else {
            (self.num.clone(), o.den.clone())
        };
        let (bn, ad) = if g2.len() > 1 {
            (pdivexact(&o.num, &g2), pdivexact(&self.den, &g2))
        } else {
            (o.num.clone(), self.den.clone())
        };
        let mut r = RatQ { num: pmul(&an, &bn), den: pmul(&ad, &bd) };
        let c = content(&r.num).gcd(&content(&r.den));
        let c = if *r.den.last().unwrap() < 0 { -c } else { c };
        pscale_div(&mut r.num, c);
        pscale_div(&mut r.den, c);
        r
    }
}

impl Div for &RatQ {
    type Output = RatQ;
    /// Panics on division by zero; use [`RatQ::try_div`] for a checked form.
    fn div(self, o: &RatQ) -> RatQ {
        self.try_div(o).expect("division by zero in Q(q)")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for RatQ {
            type Output = RatQ;
            fn $m(self, o: RatQ) -> RatQ {
                (&self).$m(&o)
            }
        }
        impl $tr<&RatQ> for RatQ {
            type Output = RatQ;
            fn $m(self, o: &RatQ) -> RatQ {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&RatQ> for RatQ {
    fn add_assign(&mut self, o: &RatQ) {
        *self = &*self + o;
    }
}

impl SubAssign<&RatQ> for RatQ {
    fn sub_assign(&mut self, o: &RatQ) {
        *self = &*self - o;
    }
}

impl MulAssign<&RatQ> for RatQ {
    fn mul_assign(&mut self, o: &RatQ) {
        *self = &*self * o;
    }
}

/// Total order used only to make containers deterministic.
impl Ord for RatQ {
    fn cmp(&self, o: &Self) -> Ordering {
        (self.den.len(), &self.den, self.num.len(), &self.num).cmp(&(
            o.den.len(),
            &o.den,
            o.num.len(),
            &o.num,
        ))
    }
}

impl PartialOrd for RatQ {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

// ---------------------------------------------------------------------------
// rendering

fn q_power_str(e: i64) -> String {
    match e {
        1 => "q".to_string(),
        _ => format!("q^{e}"),
    }
}

/// Renders `sum c_k q^(k + shift)` from the highest power down.
fn laurent_str(p: &[i128], shift: i64) -> String {
    let mut s = String::new();
    for (k, c) in p.iter().enumerate().rev() {
        if *c == 0 {
            continue;
        }
        let e = k as i64 + shift;
        let mag = c.unsigned_abs();
        if s.is_empty() {
            if *c < 0 {
                s.push('-');
            }
        } else {
            s.push_str(if *c < 0 { " - " } else { " + " });
        }
        match (mag, e) {
            (m, 0) => s.push_str(&m.to_string()),
            (1, _) => s.push_str(&q_power_str(e)),
            (m, _) => {
                s.push_str(&m.to_string());
                s.push('*');
                s.push_str(&q_power_str(e));
            }
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

fn term_count(p: &[i128]) -> usize {
    p.iter().filter(|c| **c != 0).count()
}

fn strip_qsq_minus_one(p: &mut Vec<i128>) -> usize {
    // divides by (q^2 - 1) as long as it is a factor
    let f = [-1i128, 0, 1];
    let mut m = 0;
    loop {
        if p.len() < 3 {
            return m;
        }
        let d = pdivexact_checked(p, &f);
        match d {
            Some(d) => {
                *p = d;
                m += 1;
            }
            None => return m,
        }
    }
}

fn pdivexact_checked(a: &[i128], b: &[i128]) -> Option<Vec<i128>> {
    let db = b.len() - 1;
    let lb = b[db];
    let mut r = a.to_vec();
    let mut out = vec![0i128; a.len() - db];
    for k in (0..out.len()).rev() {
        let c = r[k + db];
        if c % lb != 0 {
            return None;
        }
        let t = c / lb;
        out[k] = t;
        for (j, y) in b.iter().enumerate() {
            r[k + j] = r[k + j].checked_sub(t.checked_mul(*y)?)?;
        }
    }
    if r.iter().any(|c| *c != 0) {
        return None;
    }
    trim(&mut out);
    Some(out)
}

impl fmt::Display for RatQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut num = self.num.clone();
        let mut den = self.den.clone();
        // q^2 - 1 = q * nu
        let m = strip_qsq_minus_one(&mut num) as i64 - strip_qsq_minus_one(&mut den) as i64;
        let dord = ord(&den);
        if dord + 1 != den.len() {
            let n = laurent_str(&self.num, 0);
            let d = laurent_str(&self.den, 0);
            let n = if term_count(&self.num) > 1 { format!("({n})") } else { n };
            return write!(f, "{n}/({d})");
        }
        let d = den[dord];
        let body = laurent_str(&num, m - dord as i64);
        let multi = term_count(&num) > 1;
        let nu = |k: i64| if k == 1 { "nu".to_string() } else { format!("nu^{k}") };
        let mut s = if m > 0 {
            match body.as_str() {
                "1" => nu(m),
                "-1" => format!("-{}", nu(m)),
                _ if multi => format!("({body})*{}", nu(m)),
                _ => format!("{body}*{}", nu(m)),
            }
        } else if multi {
            format!("({body})")
        } else {
            body
        };
        let mut den_parts = Vec::new();
        if d != 1 {
            den_parts.push(d.to_string());
        }
        if m < 0 {
            den_parts.push(nu(-m));
        }
        match den_parts.len() {
            0 => {
                if m <= 0 && multi {
                    s = s[1..s.len() - 1].to_string();
                }
            }
            1 => {
                s.push('/');
                s.push_str(&den_parts[0]);
            }
            _ => {
                s.push_str("/(");
                s.push_str(&den_parts.join("*"));
                s.push(')');
            }
        }
        f.write_str(&s)
    }
}

impl fmt::Debug for RatQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for RatQ {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl std::str::FromStr for RatQ {
    type Err = crate::parse::ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        crate::parse::parse_scalar(s, &Default::default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> RatQ {
        s.parse().unwrap()
    }

    #[test]
    fn inverse_pair() {
        assert!((&RatQ::q() * &RatQ::q_pow(-1)).is_one());
    }

    #[test]
    fn difference_of_squares() {
        let a = &RatQ::q_pow(2) - &RatQ::q_pow(-2);
        let b = &RatQ::q() - &RatQ::q_pow(-1);
        assert_eq!(&a / &b, &RatQ::q() + &RatQ::q_pow(-1));
        assert_eq!(&RatQ::nu() * &RatQ::qint(2), a);
    }

    #[test]
    fn evaluation() {
        let two = BigRational::from_integer(2.into());
        assert_eq!(RatQ::q().eval(&two).unwrap(), two);
        assert_eq!(
            RatQ::nu().eval(&two).unwrap(),
            BigRational::new(3.into(), 2.into())
        );
        let x = r("(q^2-1)/(q-1)");
        assert_eq!(x, r("q+1"));
        assert_eq!(
            x.eval(&BigRational::from_integer(3.into())).unwrap(),
            BigRational::from_integer(4.into())
        );
        let pole = r("1/(q-1)");
        assert!(pole.eval(&BigRational::from_integer(1.into())).is_err());
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(RatQ::one().try_div(&RatQ::zero()), Err(ScalarError::DivisionByZero));
    }

    #[test]
    fn rendering() {
        assert_eq!(RatQ::nu().to_string(), "nu");
        assert_eq!((-RatQ::nu()).to_string(), "-nu");
        assert_eq!(RatQ::q_pow(-1).to_string(), "q^-1");
        assert_eq!(r("q^-2*nu^2").to_string(), "q^-2*nu^2");
        assert_eq!(r("q + q^-1").to_string(), "q + q^-1");
        assert_eq!(r("1/nu").to_string(), "1/nu");
        assert_eq!(r("(q^-1 - 1)*nu").to_string(), "(-1 + q^-1)*nu");
        assert_eq!(r("3/2").to_string(), "3/2");
        assert_eq!(r("q/(q^2+1)").to_string(), "q/(q^2 + 1)");
        for s in ["q^-2*nu^2", "(q^-1 - 1)*nu", "-q^3/nu^2", "(2*q + 1)/3", "q/(q^2 + 1)", "(q^4 + 1)/(q^2 + q + 1)"] {
            let v = r(s);
            assert_eq!(r(&v.to_string()), v, "{s}");
        }
    }

    #[test]
    fn canonical_content() {
        let a = RatQ::from_parts(vec![2, 4], vec![6]);
        assert_eq!(a.numer(), &[1, 2]);
        assert_eq!(a.denom(), &[3]);
        let b = RatQ::from_parts(vec![1], vec![0, -2]);
        assert_eq!(b.numer(), &[-1]);
        assert_eq!(b.denom(), &[0, 2]);
    }

    #[test]
    fn bigint_gcd_fallback() {
        let big = 1i128 << 62;
        let a = RatQ::from_parts(vec![big, 1, big - 3, 7, 1], vec![3, big, 5, 1]);
        let b = &a * &a.inv().unwrap();
        assert!(b.is_one());
    }
}
