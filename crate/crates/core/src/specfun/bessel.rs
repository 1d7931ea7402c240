//! Bessel functions of the first kind on the half-integer order lattice.
//!
//! Integer orders use Miller's backward recurrence normalised with
//! `J_0 + 2 Σ J_2k = 1`. Positive half-integer orders use the same backward
//! sweep, continued down to order -1/2 and scaled against the closed forms
//! `J_{1/2}(x) = sqrt(2/(πx)) sin x` and `J_{-1/2}(x) = sqrt(2/(πx)) cos x`.
//! Negative half-integer orders run the recurrence away from zero starting
//! from the same two closed forms, which is the stable direction there.
//!
//! Starting orders for the backward sweep follow the envelope estimates of
//! Zhang & Jin, *Computation of Special Functions* (1996), MSTA1/MSTA2.

use std::f64::consts::PI;
use std::fmt;

use super::SpecFunError;

/// A Bessel order `ν` stored as the integer `2ν`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfIntOrder {
    twice: i32,
}

impl HalfIntOrder {
    pub const fn from_twice(twice: i32) -> Self {
        Self { twice }
    }

    pub const fn integer(n: i32) -> Self {
        Self { twice: 2 * n }
    }

    pub const fn twice_order(self) -> i32 {
        self.twice
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub fn as_integer(self) -> Option<i32> {
        self.is_integer().then_some(self.twice / 2)
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }
}

impl fmt::Display for HalfIntOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_integer() {
            Some(n) => write!(f, "{n}"),
            None => write!(f, "{}/2", self.twice),
        }
    }
}

/// Magnitude envelope: `-log10 |J_n(x)|` is roughly `envj(n, x)` for `n > x`.
#[allow(clippy::approx_constant)]
fn envj(n: f64, x: f64) -> f64 {
    0.5 * (6.28 * n).log10() - n * (1.36 * x / n).log10()
}

fn secant_order(a0: f64, mut n0: i64, obj: f64) -> i64 {
    let mut f0 = envj(n0 as f64, a0) - obj;
    let mut n1 = n0 + 5;
    let mut f1 = envj(n1 as f64, a0) - obj;
    let mut nn = n1;
    for _ in 0..20 {
        if f1 == f0 {
            break;
        }
        nn = n1 - ((n1 - n0) as f64 / (1.0 - f0 / f1)) as i64;
        nn = nn.max(1);
        let f = envj(nn as f64, a0) - obj;
        if (nn - n1).abs() < 1 {
            break;
        }
        n0 = n1;
        f0 = f1;
        n1 = nn;
        f1 = f;
    }
    nn
}

/// Order at which `|J_n(x)|` has decayed to about `10^-mp`.
fn msta1(x: f64, mp: f64) -> usize {
    let a0 = x.abs();
    let n0 = (1.1 * a0) as i64 + 1;
    secant_order(a0, n0, mp).max(1) as usize
}

/// Starting order so that `J_0 ..= J_n` come out with about `mp` digits.
fn msta2(x: f64, n: usize, mp: f64) -> usize {
    let a0 = x.abs();
    let hmp = 0.5 * mp;
    let ejn = envj(n.max(1) as f64, a0);
    let (obj, n0) = if ejn <= hmp {
        (mp, (1.1 * a0) as i64 + 1)
    } else {
        (hmp + ejn, n as i64)
    };
    (secant_order(a0, n0.max(1), obj).max(1) as usize) + 10
}

/// Smallest order `P` such that `|J_p(x)| < tol` for every `p > P`.
///
/// Uses the backward-recurrence envelope, which overestimates slightly; the
/// result is always at least `|x|` rounded up.
pub fn bessel_order_limit(x: f64, tol: f64) -> usize {
    let ax = x.abs();
    if ax == 0.0 {
        return 0;
    }
    let mp = -tol.log10();
    msta1(ax, mp.max(1.0)).max(ax.ceil() as usize) + 1
}

const RESCALE_AT: f64 = 1e250;

/// `J_0(x) ..= J_nmax(x)` for `x >= 0` via normalised backward recurrence.
fn integer_sequence_nonneg(x: f64, nmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let significant = msta1(x, 200.0);
    let top = nmax.min(significant);
    let start = msta2(x, top, 16.0).max(top + 2);

    let mut f_next = 0.0_f64;
    let mut f = 1e-100_f64;
    let mut norm = 0.0_f64;
    for k in (0..=start).rev() {
        if k <= top {
            out[k] = f;
        }
        if k % 2 == 0 {
            norm += if k == 0 { f } else { 2.0 * f };
        }
        if k == 0 {
            break;
        }
        let f_prev = 2.0 * k as f64 / x * f - f_next;
        f_next = f;
        f = f_prev;
        if f.abs() > RESCALE_AT {
            f /= RESCALE_AT;
            f_next /= RESCALE_AT;
            norm /= RESCALE_AT;
            if k <= top {
                for v in &mut out[k..=top] {
                    *v /= RESCALE_AT;
                }
            }
        }
    }
    for v in out.iter_mut().take(top + 1) {
        *v /= norm;
    }
    out
}

/// `J_0(x) ..= J_nmax(x)` for any finite real `x`.
pub fn bessel_j_integer_sequence(x: f64, nmax: usize) -> Vec<f64> {
    let mut out = integer_sequence_nonneg(x.abs(), nmax);
    if x < 0.0 {
        for v in out.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }
    out
}

/// Table of `J_n(x)` for `|n| <= limit`, with negative orders folded in by
/// `J_{-n} = (-1)^n J_n`.
#[derive(Debug, Clone)]
pub struct BesselTable {
    x: f64,
    values: Vec<f64>,
}

impl BesselTable {
    pub fn new(x: f64, limit: usize) -> Self {
        Self {
            x,
            values: bessel_j_integer_sequence(x, limit),
        }
    }

    /// Table reaching far enough that omitted orders are below `tol`.
    pub fn with_tolerance(x: f64, tol: f64) -> Self {
        Self::new(x, bessel_order_limit(x, tol))
    }

    pub fn argument(&self) -> f64 {
        self.x
    }

    pub fn limit(&self) -> usize {
        self.values.len() - 1
    }

    /// `J_n(x)`; zero outside the tabulated range.
    #[inline]
    pub fn get(&self, n: i64) -> f64 {
        let idx = n.unsigned_abs() as usize;
        match self.values.get(idx) {
            Some(&v) if n < 0 && idx % 2 == 1 => -v,
            Some(&v) => v,
            None => 0.0,
        }
    }

    /// Dense copy over `-limit ..= limit`; entry `i` holds `J_{i - limit}`.
    pub fn signed_dense(&self) -> Vec<f64> {
        let l = self.limit() as i64;
        (-l..=l).map(|n| self.get(n)).collect()
    }
}

fn half_closed_forms(x: f64) -> (f64, f64) {
    let c = (2.0 / (PI * x)).sqrt();
    let (s, co) = x.sin_cos();
    (c * s, c * co)
}

/// `J_{i+1/2}(x)` for `i = -1 ..= imax`; element `0` holds `J_{-1/2}`.
fn positive_half_sequence(x: f64, imax: usize) -> Vec<f64> {
    let (j_half, j_mhalf) = half_closed_forms(x);
    let len = imax + 2;
    let mut out = vec![0.0; len];
    let start = msta2(x, imax + 1, 16.0).max(imax + 3);

    // f holds order (k + 1/2).
    let mut f_next = 0.0_f64;
    let mut f = 1e-100_f64;
    let mut k = start as i64;
    loop {
        let slot = k + 1;
        if slot >= 0 && (slot as usize) < len {
            out[slot as usize] = f;
        }
        if k == -1 {
            break;
        }
        let nu = k as f64 + 0.5;
        let f_prev = 2.0 * nu / x * f - f_next;
        f_next = f;
        f = f_prev;
        if f.abs() > RESCALE_AT {
            f /= RESCALE_AT;
            f_next /= RESCALE_AT;
            for v in out.iter_mut() {
                *v /= RESCALE_AT;
            }
        }
        k -= 1;
    }
    let scale = if j_mhalf.abs() >= j_half.abs() {
        j_mhalf / out[0]
    } else {
        j_half / out[1]
    };
    for v in out.iter_mut() {
        *v *= scale;
    }
    out
}

fn negative_half(x: f64, i: usize) -> f64 {
    // order -(i + 1/2), i >= 1
    let (j_half, j_mhalf) = half_closed_forms(x);
    let mut upper = j_half; // J_{nu+1}
    let mut cur = j_mhalf; // J_nu, nu = -1/2
    let mut nu = -0.5_f64;
    for _ in 0..i {
        let lower = 2.0 * nu / x * cur - upper;
        upper = cur;
        cur = lower;
        nu -= 1.0;
    }
    cur
}

/// `J_ν(x)` for `ν` on the half-integer lattice.
///
/// Non-integer orders are only defined here for `x >= 0`; a negative
/// non-integer order at `x = 0` is singular.
pub fn bessel_j(order: HalfIntOrder, x: f64) -> Result<f64, SpecFunError> {
    if !x.is_finite() {
        return Err(SpecFunError::NonFiniteArgument(x));
    }
    if let Some(n) = order.as_integer() {
        let idx = n.unsigned_abs() as usize;
        let table = bessel_j_integer_sequence(x, idx);
        let v = table[idx];
        return Ok(if n < 0 && idx % 2 == 1 { -v } else { v });
    }
    if x < 0.0 {
        return Err(SpecFunError::Domain { order, x });
    }
    let twice = order.twice_order();
    if twice > 0 {
        if x == 0.0 {
            return Ok(0.0);
        }
        let i = ((twice - 1) / 2) as usize;
        return Ok(positive_half_sequence(x, i)[i + 1]);
    }
    if x == 0.0 {
        return Err(SpecFunError::Domain { order, x });
    }
    let i = ((-twice - 1) / 2) as usize;
    let v = if i == 0 {
        half_closed_forms(x).1
    } else {
        negative_half(x, i)
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SpecFunError::Overflow { order, x })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Power series oracle; fine for moderate `x`.
    fn series(nu: f64, x: f64) -> f64 {
        let half = x / 2.0;
        let mut term = half.powf(nu) / gamma_lattice(nu + 1.0);
        let mut sum = term;
        for k in 1..300 {
            let kf = k as f64;
            term *= -half * half / (kf * (kf + nu));
            sum += term;
            if term.abs() < 1e-20 * sum.abs() && k > 5 {
                break;
            }
        }
        sum
    }

    /// Gamma on the half-integer lattice, excluding the poles.
    fn gamma_lattice(z: f64) -> f64 {
        if z < 0.75 {
            return gamma_lattice(z + 1.0) / z;
        }
        let integral = (z - z.round()).abs() < 1e-12;
        let (mut g, mut t) = if integral { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
        while t < z - 1e-12 {
            g *= t;
            t += 1.0;
        }
        g
    }

    #[test]
    fn trivial_anchors() {
        assert_eq!(bessel_j(HalfIntOrder::integer(0), 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(HalfIntOrder::integer(1), 0.0).unwrap(), 0.0);
        let a = bessel_j(HalfIntOrder::integer(-2), 1.5).unwrap();
        let b = bessel_j(HalfIntOrder::integer(2), 1.5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn half_order_at_half_pi() {
        let v = bessel_j(HalfIntOrder::from_twice(1), PI / 2.0).unwrap();
        assert!((v - 2.0 / PI).abs() < 1e-14);
        assert!((series(0.5, PI / 2.0) - 2.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn matches_power_series() {
        for &x in &[0.1, 0.7, 1.5, 4.0, 9.5] {
            for twice in -9..=40 {
                let order = HalfIntOrder::from_twice(twice);
                let got = bessel_j(order, x).unwrap();
                let want = if twice < 0 && twice % 2 == 0 {
                    // J_{-n} = (-1)^n J_n
                    let n = -twice / 2;
                    let s = if n % 2 == 0 { 1.0 } else { -1.0 };
                    s * series(f64::from(n), x)
                } else {
                    series(order.value(), x)
                };
                let scale = want.abs().max(1.0);
                assert!(
                    (got - want).abs() < 1e-11 * scale,
                    "nu={order} x={x}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn negative_half_order_at_zero_is_domain_error() {
        assert!(matches!(
            bessel_j(HalfIntOrder::from_twice(-3), 0.0),
            Err(SpecFunError::Domain { .. })
        ));
        assert_eq!(bessel_j(HalfIntOrder::from_twice(3), 0.0).unwrap(), 0.0);
        assert!(bessel_j(HalfIntOrder::from_twice(1), -1.0).is_err());
        assert!(bessel_j(HalfIntOrder::integer(1), f64::NAN).is_err());
    }

    #[test]
    fn negative_argument_parity() {
        let a = bessel_j(HalfIntOrder::integer(3), -2.5).unwrap();
        let b = bessel_j(HalfIntOrder::integer(3), 2.5).unwrap();
        assert_eq!(a, -b);
    }

    #[test]
    fn order_limit_bounds_tail() {
        for &x in &[0.5, 10.0, 150.0, 2000.0] {
            let p = bessel_order_limit(x, 1e-12);
            let t = bessel_j_integer_sequence(x, p + 50);
            assert!(t[p + 1..].iter().all(|v| v.abs() < 1e-12), "x={x}");
        }
    }

    #[test]
    fn display() {
        assert_eq!(HalfIntOrder::from_twice(-3).to_string(), "-3/2");
        assert_eq!(HalfIntOrder::integer(4).to_string(), "4");
    }

    // mpmath at 30 digits
    #[allow(clippy::excessive_precision)]
    const REFERENCE: &[(i32, f64, f64)] = &[
        (0, 0.1, 0.997501562066040032),
        (0, 37.5, 0.071722705110602229323),
        (0, 199.0, -0.054139528598386563971),
        (0, 12868.0, 0.0051516776847088525042),
        (1, 0.1, 0.25189294032600095267),
        (1, 37.5, -0.025771997427668752792),
        (1, 199.0, -0.049875015598675655238),
        (1, 12868.0, 0.00025660946863679973197),
        (-1, 0.1, 2.5105273689585092433),
        (-1, 37.5, 0.12771973775311213687),
        (-1, 199.0, -0.026675403512173793472),
        (-1, 12868.0, 0.0070290287725583915016),
        (7, 0.1, 2.4016486669206172684e-6),
        (7, 37.5, 0.13047358277068207096),
        (7, 199.0, -0.025161625065815999302),
        (7, 12868.0, 0.0070289084857692175143),
        (-7, 0.1, -37884.866409788797218),
        (-7, 37.5, -0.0050982672511254516492),
        (-7, 199.0, -0.050660356773159833019),
        (-7, 12868.0, 0.00025988689114795049741),
        (40, 0.1, 3.9194377208586220087e-45),
        (40, 37.5, -0.032461851250686063609),
        (40, 199.0, -0.01519582204515051307),
        (40, 12868.0, 0.0052254863703890162481),
        (-40, 0.1, 3.9194377208586220087e-45),
        (-40, 37.5, -0.032461851250686063609),
        (-40, 199.0, -0.01519582204515051307),
        (-40, 12868.0, 0.0052254863703890162481),
        (81, 0.1, 3.9043258169209513459e-102),
        (81, 37.5, 0.043301248608060603649),
        (81, 199.0, 0.050103124030075549689),
        (81, 12868.0, 0.00070370525004633170751),
        (-81, 0.1, 2.0130305983875421241e+99),
        (-81, 37.5, 0.49753667652218148925),
        (-81, 199.0, -0.027516208960731686582),
        (-81, 12868.0, 0.0069984382418331133689),
        (160, 0.1, 1.1557375405848065236e-223),
        (160, 37.5, 1.1134458535295820053e-19),
        (160, 199.0, 0.037033705390950315481),
        (160, 12868.0, 0.0061719216303415174552),
        (-159, 0.1, -8.647401688606273331e+218),
        (-159, 37.5, -20301259424715957.646),
        (-159, 199.0, 0.058790429779784237148),
        (-159, 12868.0, 0.0019577596176980433532),
    ];

    #[test]
    fn matches_reference_values() {
        for &(twice, x, want) in REFERENCE {
            let got = bessel_j(HalfIntOrder::from_twice(twice), x).unwrap();
            let tol = 1e-10 * want.abs().max(1.0);
            assert!((got - want).abs() <= tol, "2nu={twice} x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn recurrence_residual() {
        let xs: Vec<f64> = (0..40).map(|i| 0.1 * (1000.0f64).powf(i as f64 / 39.0)).collect();
        for &x in &xs {
            for twice in -160..=160 {
                let nu = HalfIntOrder::from_twice(twice);
                let lo = bessel_j(HalfIntOrder::from_twice(twice - 2), x).unwrap();
                let mid = bessel_j(nu, x).unwrap();
                let hi = bessel_j(HalfIntOrder::from_twice(twice + 2), x).unwrap();
                let scale = lo.abs().max(hi.abs()).max(1.0);
                let r = (lo + hi - 2.0 * nu.value() / x * mid).abs();
                assert!(r < 1e-9 * scale, "2nu={twice} x={x} residual {r}");
            }
        }
    }

    #[test]
    fn integer_reflection() {
        for &x in &[0.3, 2.0, 17.0, 88.0] {
            for n in 0..=80 {
                let p = bessel_j(HalfIntOrder::integer(n), x).unwrap();
                let m = bessel_j(HalfIntOrder::integer(-n), x).unwrap();
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                assert!((m - sign * p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalization() {
        for i in 0..=60 {
            let x = 0.5 * i as f64;
            let t = BesselTable::new(x, 60);
            let s: f64 = (-60..=60).map(|n| t.get(n).powi(2)).sum();
            assert!((s - 1.0).abs() < 1e-9, "x={x} sum={s}");
        }
    }
}
