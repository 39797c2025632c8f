//! Exact arithmetic in the real field Q(√2, √3, √5).
//!
//! Edge lengths may be given as `q0 + q1·√2 + q2·√3 + q3·√5` with rational
//! `q_i`. Sums of such lengths stay in that span, but ratios and continued
//! fraction remainders need the whole field, so a [`Surd`] carries all eight
//! coordinates over the basis `√(2^a·3^b·5^c)` with `a, b, c ∈ {0, 1}`.
//! Coordinate `m` (a 3-bit mask: bit 0 = √2, bit 1 = √3, bit 2 = √5) is the
//! coefficient of the product of the square roots selected by `m`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

const PRIMES: [i64; 3] = [2, 3, 5];
const DIM: usize = 8;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Surd {
    coeffs: [BigRational; DIM],
}

fn basis_scale(mask: usize) -> i64 {
    (0..3).filter(|b| mask & (1 << b) != 0).map(|b| PRIMES[b]).product()
}

impl Surd {
    pub fn zero() -> Self {
        Surd {
            coeffs: std::array::from_fn(|_| BigRational::zero()),
        }
    }

    pub fn from_rational(q: BigRational) -> Self {
        let mut s = Self::zero();
        s.coeffs[0] = q;
        s
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `q0 + q1·√2 + q2·√3 + q3·√5`.
    pub fn from_linear(q: [BigRational; 4]) -> Self {
        let mut s = Self::zero();
        let [q0, q1, q2, q3] = q;
        s.coeffs[0] = q0;
        s.coeffs[1] = q1;
        s.coeffs[2] = q2;
        s.coeffs[4] = q3;
        s
    }

    /// Square root of 2, 3 or 5.
    pub fn sqrt_of(p: i64) -> Option<Self> {
        let bit = PRIMES.iter().position(|&q| q == p)?;
        let mut s = Self::zero();
        s.coeffs[1 << bit] = BigRational::one();
        Some(s)
    }

    /// Parses decimal literals (`1.25`, `-3`, `2.5e-3`) and fractions (`3/4`).
    pub fn parse_rational(text: &str) -> Option<BigRational> {
        parse_rational(text)
    }

    pub fn coeffs(&self) -> &[BigRational; DIM] {
        &self.coeffs
    }

    /// Coefficients on `1, √2, √3, √5` if the value lies in that span.
    pub fn linear_coeffs(&self) -> Option<[BigRational; 4]> {
        let cross_terms_vanish = [3usize, 5, 6, 7]
            .iter()
            .all(|&m| self.coeffs[m].is_zero());
        cross_terms_vanish.then(|| {
            [
                self.coeffs[0].clone(),
                self.coeffs[1].clone(),
                self.coeffs[2].clone(),
                self.coeffs[4].clone(),
            ]
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs[1..].iter().all(Zero::is_zero)
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.coeffs[0])
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Surd {
            coeffs: std::array::from_fn(|m| &self.coeffs[m] * q),
        }
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&BigRational::from_integer(BigInt::from(n)))
    }

    pub fn to_f64(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| c.to_f64().unwrap_or(f64::NAN) * (basis_scale(m) as f64).sqrt())
            .sum()
    }

    /// Galois conjugate flipping the sign of √p for the prime at `bit`.
    fn conjugate(&self, bit: usize) -> Self {
        Surd {
            coeffs: std::array::from_fn(|m| {
                if m & (1 << bit) != 0 {
                    -&self.coeffs[m]
                } else {
                    self.coeffs[m].clone()
                }
            }),
        }
    }

    /// Exact sign, by descending the tower Q ⊂ Q(√2) ⊂ Q(√2,√3) ⊂ Q(√2,√3,√5).
    pub fn signum(&self) -> i32 {
        sign_at_level(self, 3)
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let mut numerator = Surd::from_integer(1);
        let mut norm = self.clone();
        for bit in (0..3).rev() {
            let conj = norm.conjugate(bit);
            numerator = &numerator * &conj;
            norm = &norm * &conj;
        }
        let r = norm.coeffs[0].clone();
        debug_assert!(norm.is_rational());
        Some(numerator.scale(&r.recip()))
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> BigInt {
        if let Some(q) = self.as_rational() {
            return q.floor().to_integer();
        }
        let approx = self.to_f64();
        let mut k = if approx.is_finite() {
            BigInt::from(approx.floor() as i64)
        } else {
            BigInt::zero()
        };
        let below = |k: &BigInt| (self - &Surd::from_bigint(k)).signum() < 0;
        let mut step = BigInt::one();
        while below(&k) {
            k -= &step;
            step *= 2;
        }
        // now k <= x; find the largest such k
        let mut hi = &k + BigInt::one();
        let mut step = BigInt::one();
        while !below(&hi) {
            hi += &step;
            step *= 2;
        }
        // invariant: k <= x < hi
        while &hi - &k > BigInt::one() {
            let mid: BigInt = (&k + &hi) / 2;
            if below(&mid) {
                hi = mid;
            } else {
                k = mid;
            }
        }
        k
    }

    pub fn from_bigint(n: &BigInt) -> Self {
        Self::from_rational(BigRational::from_integer(n.clone()))
    }

    /// True when `other` is a rational multiple of `self` (both non-zero).
    pub fn ratio_if_rational(&self, other: &Surd) -> Option<BigRational> {
        let pivot = self.coeffs.iter().position(|c| !c.is_zero())?;
        let q = &other.coeffs[pivot] / &self.coeffs[pivot];
        (0..DIM)
            .all(|m| other.coeffs[m] == &self.coeffs[m] * &q)
            .then_some(q)
    }
}

fn sign_at_level(x: &Surd, level: usize) -> i32 {
    if level == 0 {
        return match x.coeffs[0].cmp(&BigRational::zero()) {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        };
    }
    let top = 1 << (level - 1);
    let mut lower = Surd::zero();
    let mut upper = Surd::zero();
    for m in 0..top {
        lower.coeffs[m] = x.coeffs[m].clone();
        upper.coeffs[m] = x.coeffs[m | top].clone();
    }
    let sa = sign_at_level(&lower, level - 1);
    let sb = sign_at_level(&upper, level - 1);
    if sb == 0 {
        return sa;
    }
    if sa == 0 || sa == sb {
        return sb;
    }
    // a and b√p have opposite signs: compare a² with p·b²
    let p = PRIMES[level - 1];
    let d = &(&lower * &lower) - &(&upper * &upper).scale_int(p);
    sa * sign_at_level(&d, level - 1)
}

fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(all_digits.parse::<BigInt>().ok()?);
    let shift = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let factor = num_traits::pow(ten, shift.unsigned_abs() as usize);
    if shift >= 0 {
        value *= factor;
    } else {
        value /= factor;
    }
    Some(if negative { -value } else { value })
}

impl<'a> Add<&'a Surd> for &'a Surd {
    type Output = Surd;
    fn add(self, rhs: &Surd) -> Surd {
        Surd {
            coeffs: std::array::from_fn(|m| &self.coeffs[m] + &rhs.coeffs[m]),
        }
    }
}

impl<'a> Sub<&'a Surd> for &'a Surd {
    type Output = Surd;
    fn sub(self, rhs: &Surd) -> Surd {
        Surd {
            coeffs: std::array::from_fn(|m| &self.coeffs[m] - &rhs.coeffs[m]),
        }
    }
}

impl<'a> Mul<&'a Surd> for &'a Surd {
    type Output = Surd;
    fn mul(self, rhs: &Surd) -> Surd {
        let mut out = Surd::zero();
        for i in 0..DIM {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..DIM {
                if rhs.coeffs[j].is_zero() {
                    continue;
                }
                let k = basis_scale(i & j);
                let term = &self.coeffs[i] * &rhs.coeffs[j];
                out.coeffs[i ^ j] += term * BigRational::from_integer(BigInt::from(k));
            }
        }
        out
    }
}

impl Neg for &Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd {
            coeffs: std::array::from_fn(|m| -&self.coeffs[m]),
        }
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(self, rhs: Surd) -> Surd {
        &self + &rhs
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, rhs: Surd) -> Surd {
        &self - &rhs
    }
}

impl Mul for Surd {
    type Output = Surd;
    fn mul(self, rhs: Surd) -> Surd {
        &self * &rhs
    }
}

impl PartialOrd for Surd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Surd {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum().cmp(&0)
    }
}

impl fmt::Debug for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Surd({self})")
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const NAMES: [&str; DIM] = ["", "√2", "√3", "√6", "√5", "√10", "√15", "√30"];
        let mut wrote = false;
        for (m, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if wrote {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            let a = c.abs();
            if m == 0 {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{}", NAMES[m])?;
            } else {
                write!(f, "{a}·{}", NAMES[m])?;
            }
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_rational("1.25"), Some(q(5, 4)));
        assert_eq!(parse_rational("-3"), Some(q(-3, 1)));
        assert_eq!(parse_rational("2.5e-3"), Some(q(1, 400)));
        assert_eq!(parse_rational("3/4"), Some(q(3, 4)));
        assert_eq!(parse_rational(".5"), Some(q(1, 2)));
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn sign_of_near_cancellation() {
        // 99/70 is a convergent of √2; the difference is about 7e-5
        let s2 = Surd::sqrt_of(2).unwrap();
        let x = &s2 - &Surd::from_rational(q(99, 70));
        assert_eq!(x.signum(), -1);
        let y = &s2 - &Surd::from_rational(q(140, 99));
        assert_eq!(y.signum(), 1);
        // √2 + √3 vs √10: 5 + 2√6 ≈ 9.899 < 10
        let s3 = Surd::sqrt_of(3).unwrap();
        let mut s10 = Surd::zero();
        s10.coeffs[5] = BigRational::one();
        assert_eq!((&(&s2 + &s3) - &s10).signum(), -1);
    }

    #[test]
    fn inverse_is_exact() {
        let x = Surd::from_linear([q(1, 1), q(2, 3), q(-1, 2), q(5, 7)]);
        let y = x.inverse().unwrap();
        assert_eq!(&x * &y, Surd::from_integer(1));
        assert!(Surd::zero().inverse().is_none());
    }

    #[test]
    fn floor_matches_float_away_from_integers() {
        let x = Surd::from_linear([q(3, 1), q(1, 1), q(0, 1), q(1, 1)]);
        assert_eq!(x.floor(), BigInt::from((3.0 + 2f64.sqrt() + 5f64.sqrt()).floor() as i64));
        let neg = -&Surd::sqrt_of(5).unwrap();
        assert_eq!(neg.floor(), BigInt::from(-3));
        assert_eq!(Surd::from_integer(4).floor(), BigInt::from(4));
    }

    #[test]
    fn commensurability() {
        let s2 = Surd::sqrt_of(2).unwrap();
        let three_s2 = s2.scale_int(3);
        assert_eq!(s2.ratio_if_rational(&three_s2), Some(q(3, 1)));
        assert_eq!(s2.ratio_if_rational(&Surd::from_integer(1)), None);
    }
}
