//! Truncated multivariate Taylor polynomials ("jets") with real
//! coefficients, enough to push a perturbation series through `exp`, `ln`
//! and the Perron eigenvalue.

use std::collections::HashMap;

/// Monomials in `nvars` variables of total degree `<= degree`, with a
/// precomputed multiplication table.
#[derive(Debug, Clone)]
pub struct JetSpace {
    nvars: usize,
    degree: usize,
    monomials: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    products: Vec<(usize, usize, usize)>,
}

pub type Jet = Vec<f64>;

impl JetSpace {
    pub fn new(nvars: usize, degree: usize) -> Self {
        let mut monomials: Vec<Vec<u8>> = vec![vec![0; nvars]];
        let mut frontier = monomials.clone();
        for _ in 0..degree {
            let mut next = Vec::new();
            for m in &frontier {
                // extend only at or after the last nonzero slot: each monomial once
                let start = m.iter().rposition(|&e| e > 0).unwrap_or(0);
                for v in start..nvars {
                    let mut n = m.clone();
                    n[v] += 1;
                    next.push(n);
                }
            }
            monomials.extend(next.iter().cloned());
            frontier = next;
        }
        let index: HashMap<Vec<u8>, usize> = monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let mut products = Vec::new();
        for (i, a) in monomials.iter().enumerate() {
            for (j, b) in monomials.iter().enumerate() {
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                if let Some(&k) = index.get(&sum) {
                    products.push((i, j, k));
                }
            }
        }
        JetSpace {
            nvars,
            degree,
            monomials,
            index,
            products,
        }
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn monomials(&self) -> &[Vec<u8>] {
        &self.monomials
    }

    pub fn position(&self, exponents: &[u8]) -> Option<usize> {
        self.index.get(exponents).copied()
    }

    pub fn zero(&self) -> Jet {
        vec![0.0; self.len()]
    }

    pub fn constant(&self, c: f64) -> Jet {
        let mut j = self.zero();
        j[0] = c;
        j
    }

    /// The linear form `Σ coeffs[v]·x_v`.
    pub fn linear(&self, coeffs: &[f64]) -> Jet {
        let mut j = self.zero();
        for (v, &c) in coeffs.iter().enumerate() {
            let mut e = vec![0u8; self.nvars];
            e[v] = 1;
            if let Some(k) = self.position(&e) {
                j[k] = c;
            }
        }
        j
    }

    pub fn mul(&self, a: &Jet, b: &Jet) -> Jet {
        let mut out = self.zero();
        for &(i, j, k) in &self.products {
            out[k] += a[i] * b[j];
        }
        out
    }

    pub fn add_scaled(&self, acc: &mut Jet, a: &Jet, c: f64) {
        for (x, y) in acc.iter_mut().zip(a) {
            *x += c * y;
        }
    }

    /// `Σ_k coeffs[k]·x^k` where `x` has zero constant term.
    fn series(&self, x: &Jet, coeffs: &[f64]) -> Jet {
        let mut out = self.constant(coeffs[0]);
        let mut power = self.constant(1.0);
        for &c in &coeffs[1..] {
            power = self.mul(&power, x);
            self.add_scaled(&mut out, &power, c);
        }
        out
    }

    pub fn exp(&self, a: &Jet) -> Jet {
        let c0 = a[0];
        let mut x = a.clone();
        x[0] = 0.0;
        let mut coeffs = vec![1.0];
        for k in 1..=self.degree {
            let prev = coeffs[k - 1];
            coeffs.push(prev / k as f64);
        }
        let mut out = self.series(&x, &coeffs);
        out.iter_mut().for_each(|y| *y *= c0.exp());
        out
    }

    pub fn ln(&self, a: &Jet) -> Jet {
        let c0 = a[0];
        assert!(c0 > 0.0, "logarithm of a jet with non-positive constant term");
        let mut y: Jet = a.iter().map(|x| x / c0).collect();
        y[0] = 0.0;
        let mut coeffs = vec![c0.ln()];
        for k in 1..=self.degree {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            coeffs.push(sign / k as f64);
        }
        self.series(&y, &coeffs)
    }

    /// Partial derivative `∂^e` at the origin: coefficient times `e!`.
    pub fn derivative(&self, a: &Jet, exponents: &[u8]) -> f64 {
        match self.position(exponents) {
            Some(k) => {
                let fact: f64 = exponents.iter().map(|&e| (1..=e as u32).product::<u32>() as f64).product();
                a[k] * fact
            }
            None => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn monomial_count() {
        // C(n + d, d)
        assert_eq!(JetSpace::new(3, 4).len(), 35);
        assert_eq!(JetSpace::new(4, 4).len(), 70);
        assert_eq!(JetSpace::new(1, 6).len(), 7);
    }

    #[test]
    fn exp_and_ln_are_inverse() {
        let sp = JetSpace::new(2, 4);
        let mut a = sp.linear(&[0.3, -1.2]);
        a[0] = 0.7;
        let x_sq = sp.mul(&a, &a);
        sp.add_scaled(&mut a, &x_sq, 0.25);
        let back = sp.ln(&sp.exp(&a));
        for (x, y) in back.iter().zip(&a) {
            assert_relative_eq!(x, y, epsilon = 1e-13);
        }
    }

    #[test]
    fn derivatives_of_exp_product() {
        // f(x, y) = exp(2x - y): ∂x^2 ∂y^2 f(0) = 4
        let sp = JetSpace::new(2, 4);
        let f = sp.exp(&sp.linear(&[2.0, -1.0]));
        assert_relative_eq!(sp.derivative(&f, &[2, 2]), 4.0, epsilon = 1e-13);
        assert_relative_eq!(sp.derivative(&f, &[3, 0]), 8.0, epsilon = 1e-13);
        assert_relative_eq!(sp.derivative(&f, &[0, 1]), -1.0, epsilon = 1e-13);
    }

    #[test]
    fn log_cosh_fourth_derivative() {
        // ln(cosh x) = x²/2 - x⁴/12 + …, fourth derivative -2
        let sp = JetSpace::new(1, 4);
        let e = sp.exp(&sp.linear(&[1.0]));
        let em = sp.exp(&sp.linear(&[-1.0]));
        let mut c = e.clone();
        sp.add_scaled(&mut c, &em, 1.0);
        c.iter_mut().for_each(|x| *x *= 0.5);
        let l = sp.ln(&c);
        assert_relative_eq!(sp.derivative(&l, &[2]), 1.0, epsilon = 1e-14);
        assert_relative_eq!(sp.derivative(&l, &[4]), -2.0, epsilon = 1e-13);
    }
}
