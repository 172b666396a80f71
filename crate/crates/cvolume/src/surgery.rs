//! Continued fractions, Bezout data and the lens space closed form.

use crate::dilog::{ModValue, C64, TWO_PI_SQ};
use crate::error::{Error, Result};
use crate::diagram::gcd;

/// `⟨a1, …, ak⟩ = a1 - 1/(a2 - 1/(…))` as a reduced fraction `(num, den)`
/// with `den > 0`.
pub fn cf_eval(a: &[i64]) -> Result<(i64, i64)> {
    let (mut num, mut den) = match a.last() {
        Some(&x) => (x as i128, 1i128),
        None => return Err(Error::CFUndefined),
    };
    for &ai in a.iter().rev().skip(1) {
        if num == 0 {
            return Err(Error::CFUndefined);
        }
        // ai - den/num
        let (n2, d2) = (ai as i128 * num - den, num);
        num = n2;
        den = d2;
    }
    if den == 0 {
        return Err(Error::CFUndefined);
    }
    if den < 0 {
        num = -num;
        den = -den;
    }
    let g = gcd128(num, den);
    Ok(((num / g) as i64, (den / g) as i64))
}

fn gcd128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// Convergents `p0 = 0, p1 = -1, p_{i+1} = a_i p_i - p_{i-1}` and
/// `q0 = 1, q1 = 0, q_{i+1} = a_i q_i - q_{i-1}`.
pub fn cf_convergents(a: &[i64]) -> (Vec<i64>, Vec<i64>) {
    let mut p = vec![0, -1];
    let mut q = vec![1, 0];
    for (i, &ai) in a.iter().enumerate() {
        p.push(ai * p[i + 1] - p[i]);
        q.push(ai * q[i + 1] - q[i]);
    }
    (p, q)
}

/// `[[r, s], [p, q]]` with `|rq - ps| = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GluingMatrix {
    pub p: i64,
    pub q: i64,
    pub r: i64,
    pub s: i64,
}

impl GluingMatrix {
    pub fn new(p: i64, q: i64, r: i64, s: i64) -> Result<Self> {
        let g = GluingMatrix { p, q, r, s };
        if g.det().abs() != 1 {
            return Err(Error::InvalidMatrix(format!(
                "rq - ps = {} for [[{r}, {s}], [{p}, {q}]]",
                g.det()
            )));
        }
        Ok(g)
    }

    /// `rq - ps`.
    pub fn det(&self) -> i64 {
        self.r * self.q - self.p * self.s
    }
}

/// Checks that the convergents of `a` end in `±(p, q)` preceded by
/// `±(r, s)`. The relative sign is forced by the determinant.
pub fn cf_realizes(a: &[i64], g: &GluingMatrix) -> bool {
    let (p, q) = cf_convergents(a);
    let k = a.len();
    let (fp, fq, pp, pq) = (p[k + 1], q[k + 1], p[k], q[k]);
    let sign = if (fp, fq) == (g.p, g.q) {
        1
    } else if (fp, fq) == (-g.p, -g.q) {
        -1
    } else {
        return false;
    };
    let rel = g.det();
    (pp, pq) == (sign * rel * g.r, sign * rel * g.s)
}

/// A continued fraction whose last two convergents are `(p, q)` and
/// `(r, s)`, up to sign.
pub fn matrix_to_cf(g: &GluingMatrix) -> Result<Vec<i64>> {
    GluingMatrix::new(g.p, g.q, g.r, g.s)?;
    // normalize so that the determinant relation reads rq - ps = 1
    let (r, s) = (g.det() * g.r, g.det() * g.s);
    let target = GluingMatrix { p: g.p, q: g.q, r, s };
    let mut a: Vec<i64> = if g.q == 0 {
        Vec::new()
    } else {
        minus_cf(g.p, g.q)
    };
    let check = |a: &[i64]| cf_realizes(a, &target);
    if check(&a) {
        return Ok(a);
    }
    let (cp, cq) = cf_convergents(&a);
    let k = a.len();
    let sign = if (cp[k + 1], cq[k + 1]) == (g.p, g.q) { 1 } else { -1 };
    let (pen_p, pen_q) = (sign * cp[k], sign * cq[k]);
    // the target penultimate differs by a multiple of (p, q)
    let t = if g.p != 0 { (r - pen_p) / g.p } else { (s - pen_q) / g.q };
    if (pen_p + t * g.p, pen_q + t * g.q) != (r, s) {
        return Err(Error::NoCFFound);
    }
    if a.is_empty() {
        // only (±1, 0): ⟨x, 0⟩ ends in (1, 0) after (-x, -1)
        for cand in [vec![-r, 0], vec![r, 0]] {
            if check(&cand) {
                return Ok(cand);
            }
        }
        return Err(Error::NoCFFound);
    }
    let last = a.len() - 1;
    if t > 0 {
        a[last] += 1;
        a.extend(std::iter::repeat_n(2, (t - 1) as usize));
        a.push(1);
    } else {
        a[last] -= 1;
        a.extend(std::iter::repeat_n(-2, (-t - 1) as usize));
        a.push(-1);
    }
    if check(&a) {
        Ok(a)
    } else {
        Err(Error::NoCFFound)
    }
}

/// Ceiling-division minus continued fraction of `p/q`, `q > 0`.
fn minus_cf(p: i64, q: i64) -> Vec<i64> {
    let (mut n, mut d) = if q < 0 { (-p, -q) } else { (p, q) };
    let mut a = Vec::new();
    loop {
        let c = n.div_euclid(d) + if n.rem_euclid(d) == 0 { 0 } else { 1 };
        a.push(c);
        // n/d = c - d'/n' with n' = d, d' = c d - n
        let rem = c * d - n;
        if rem == 0 {
            return a;
        }
        n = d;
        d = rem;
    }
}

/// `(r, s)` with `ps - qr = 1`, `r` the least nonnegative choice.
pub fn bezout(p: i64, q: i64) -> Result<(i64, i64)> {
    if gcd(p, q) != 1 {
        return Err(Error::NotCoprime(p, q));
    }
    if p == 0 {
        return Ok((-q, 0));
    }
    let m = p.abs();
    // q r ≡ -1 (mod |p|)
    let r = (0..m).find(|&r| (q * r + 1).rem_euclid(m) == 0).expect("coprime");
    let s = (1 + q * r) / p;
    Ok((r, s))
}

/// `4π²i n² r / p` with `qr ≡ -1 (mod p)`, `r > 0` least.
pub fn lens_oracle(p: i64, q: i64, n: i64) -> Result<ModValue> {
    if p <= 0 || gcd(p, q) != 1 {
        return Err(Error::NotCoprime(p, q));
    }
    let r = (1..=p).find(|&r| (q * r + 1).rem_euclid(p) == 0).expect("coprime");
    let v = 2.0 * TWO_PI_SQ * (n * n * r) as f64 / p as f64;
    Ok(ModValue::volume(C64::new(0.0, v)).reduced())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        assert_eq!(cf_eval(&[2]).unwrap(), (2, 1));
        assert_eq!(cf_eval(&[2, 2, 2]).unwrap(), (4, 3));
        assert!(matches!(cf_eval(&[1, 0]), Err(Error::CFUndefined)));
        assert!(matches!(cf_eval(&[]), Err(Error::CFUndefined)));
    }

    #[test]
    fn convergents_example() {
        let (p, q) = cf_convergents(&[2, 2, 2]);
        assert_eq!(p, vec![0, -1, -2, -3, -4]);
        assert_eq!(q, vec![1, 0, -1, -2, -3]);
        for k in 1..4 {
            assert_eq!(p[k] * q[k + 1] - q[k] * p[k + 1], 1);
        }
    }

    #[test]
    fn matrix_examples() {
        let g = GluingMatrix::new(4, 3, 3, 2).unwrap();
        assert_eq!(matrix_to_cf(&g).unwrap(), vec![2, 2, 2]);
        let swap = GluingMatrix::new(1, 0, 0, 1).unwrap();
        assert_eq!(matrix_to_cf(&swap).unwrap(), Vec::<i64>::new());
        for (p, q) in [(3, 1), (5, 2), (7, 3)] {
            let (r, s) = bezout(p, q).unwrap();
            let g = GluingMatrix::new(p, q, r, s).unwrap();
            let a = matrix_to_cf(&g).unwrap();
            assert!(cf_realizes(&a, &g), "{p}/{q}: {a:?}");
        }
    }

    #[test]
    fn bezout_examples() {
        assert_eq!(bezout(1, 0).unwrap(), (0, 1));
        assert_eq!(bezout(5, 1).unwrap(), (4, 1));
        assert_eq!(bezout(3, 2).unwrap(), (1, 1));
        assert!(matches!(bezout(4, 2), Err(Error::NotCoprime(4, 2))));
    }

    #[test]
    fn oracle_examples() {
        let v = lens_oracle(5, 1, 1).unwrap();
        assert!((v.value.im - 1.2 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
        assert_eq!(lens_oracle(7, 3, 0).unwrap().value.im, 0.0);
        let zero = ModValue::volume(C64::new(0.0, 0.0));
        assert!(crate::dilog::mod_distance(&lens_oracle(2, 1, 1).unwrap(), &zero).unwrap() < 1e-12);
    }
}
