//! Truncation windows from characteristic-function envelopes.
//!
//! The moduli of Gaussian and Laplacian characteristic functions are even
//! and decreasing in `|n|`, so the discarded tail of a series weighted by a
//! product of them is bounded by twice the integral of that product beyond
//! the cut.

use crate::specfun::{AngularFamily, AngularSpec};

const UNBOUNDED: usize = usize::MAX / 4;

/// Product of characteristic-function moduli,
/// `exp(-g n^2 / 2) * prod_i 1 / (1 + b_i^2 n^2)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Envelope {
    gauss_var: f64,
    laplace_scales: Vec<f64>,
}

impl Envelope {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn of(specs: &[&AngularSpec]) -> Self {
        specs.iter().fold(Self::new(), |e, s| e.times(s))
    }

    /// Multiplies in `|χ|` of `spec`. Point masses contribute 1.
    pub fn times(mut self, spec: &AngularSpec) -> Self {
        if spec.spread > 0.0 {
            match spec.family {
                AngularFamily::Gaussian => self.gauss_var += spec.spread * spec.spread,
                AngularFamily::Laplacian => self.laplace_scales.push(spec.spread),
                _ => {}
            }
        }
        self
    }

    pub fn squared(&self) -> Self {
        let mut laplace_scales = self.laplace_scales.clone();
        laplace_scales.extend_from_slice(&self.laplace_scales);
        Self {
            gauss_var: 2.0 * self.gauss_var,
            laplace_scales,
        }
    }

    pub fn is_flat(&self) -> bool {
        self.gauss_var == 0.0 && self.laplace_scales.is_empty()
    }

    pub fn eval(&self, n: f64) -> f64 {
        let n2 = n * n;
        let lap: f64 = self
            .laplace_scales
            .iter()
            .map(|b| 1.0 / (1.0 + b * b * n2))
            .product();
        (-0.5 * self.gauss_var * n2).exp() * lap
    }

    /// Upper bound on `sum_{|n| > cut} eval(n)`.
    pub fn tail_bound(&self, cut: usize) -> f64 {
        if self.is_flat() {
            return f64::INFINITY;
        }
        let x = cut as f64;
        if x == 0.0 {
            return f64::INFINITY;
        }
        if self.gauss_var > 0.0 {
            let lap: f64 = self
                .laplace_scales
                .iter()
                .map(|b| 1.0 / (1.0 + b * b * x * x))
                .product();
            // Mills-ratio bound on the Gaussian integral
            2.0 * lap * (-0.5 * self.gauss_var * x * x).exp() / (self.gauss_var * x)
        } else {
            let l = self.laplace_scales.len() as i32;
            let b2: f64 = self.laplace_scales.iter().map(|b| b * b).product();
            2.0 / (b2 * f64::from(2 * l - 1) * x.powi(2 * l - 1))
        }
    }

    /// Smallest cut whose tail bound is below `tol`, or a very large value
    /// when the envelope does not decay.
    pub fn window(&self, tol: f64) -> usize {
        if self.is_flat() {
            return UNBOUNDED;
        }
        let mut hi = 1usize;
        while self.tail_bound(hi) >= tol {
            if hi >= UNBOUNDED {
                return UNBOUNDED;
            }
            hi = hi.saturating_mul(2);
        }
        let mut lo = hi / 2;
        if lo == 0 {
            return hi;
        }
        // tail_bound(lo) >= tol > tail_bound(hi)
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.tail_bound(mid) < tol {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

/// A window clipped to where the series terms vanish and to the policy cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub order: usize,
    pub clipped: bool,
}

/// `natural` is the envelope window, `support` the order beyond which the
/// Bessel factors are negligible.
pub fn clip(natural: usize, support: usize, max_order: usize) -> Window {
    let w = natural.min(support);
    if w > max_order {
        Window {
            order: max_order,
            clipped: true,
        }
    } else {
        Window {
            order: w,
            clipped: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_tail(e: &Envelope, cut: usize) -> f64 {
        2.0 * (cut + 1..cut + 2_000_000).map(|n| e.eval(n as f64)).sum::<f64>()
    }

    #[test]
    fn bounds_hold() {
        let g = AngularSpec::gaussian(0.3, 0.25);
        let l = AngularSpec::laplacian(0.0, 0.11);
        let l2 = AngularSpec::laplacian(0.0, 0.42);
        for env in [
            Envelope::of(&[&g]),
            Envelope::of(&[&l]),
            Envelope::of(&[&g, &l]),
            Envelope::of(&[&l, &l2]),
            Envelope::of(&[&l]).squared(),
        ] {
            for cut in [1, 5, 20, 80] {
                assert!(brute_tail(&env, cut) <= env.tail_bound(cut), "{env:?} {cut}");
            }
        }
    }

    #[test]
    fn window_is_minimal() {
        let env = Envelope::of(&[&AngularSpec::gaussian(0.0, 0.25)]);
        let w = env.window(1e-8);
        assert!(env.tail_bound(w) < 1e-8);
        assert!(env.tail_bound(w - 1) >= 1e-8);
        assert!(w < 40);
    }

    #[test]
    fn point_masses_do_not_decay() {
        let env = Envelope::of(&[&AngularSpec::gaussian(1.0, 0.0)]);
        assert!(env.is_flat());
        assert_eq!(env.window(1e-8), UNBOUNDED);
        assert_eq!(clip(UNBOUNDED, 12, 60), Window { order: 12, clipped: false });
        assert_eq!(clip(100, 120, 60), Window { order: 60, clipped: true });
    }
}
