//! Fourth-order finite differences on the uniform pole-to-pole grid.
//!
//! Ghost nodes beyond each pole come from reflection: even quantities are
//! mirrored, odd quantities are point-reflected through the end value.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Parity {
    Even,
    Odd,
}

#[inline]
fn ghost(f: &[f64], i: isize, parity: Parity) -> f64 {
    let last = (f.len() - 1) as isize;
    if (0..=last).contains(&i) {
        return f[i as usize];
    }
    let (anchor, mirror) = if i < 0 { (0, -i) } else { (last, 2 * last - i) };
    let m = f[mirror as usize];
    match parity {
        Parity::Even => m,
        Parity::Odd => 2.0 * f[anchor as usize] - m,
    }
}

/// First derivative, `(8(f₊₁ − f₋₁) − (f₊₂ − f₋₂))/(12h)`.
pub(crate) fn d1(f: &[f64], parity: Parity, h: f64) -> Vec<f64> {
    let len = f.len() as isize;
    (0..len)
        .map(|i| {
            let g = |k: isize| ghost(f, i + k, parity);
            // grouped so that mirrored data gives exactly mirrored results
            (8.0 * (g(1) - g(-1)) - (g(2) - g(-2))) / (12.0 * h)
        })
        .collect()
}

/// Second derivative, `(16(f₊₁ + f₋₁) − (f₊₂ + f₋₂) − 30f₀)/(12h²)`.
pub(crate) fn d2(f: &[f64], parity: Parity, h: f64) -> Vec<f64> {
    let len = f.len() as isize;
    (0..len)
        .map(|i| {
            let g = |k: isize| ghost(f, i + k, parity);
            (16.0 * (g(1) + g(-1)) - (g(2) + g(-2)) - 30.0 * g(0)) / (12.0 * h * h)
        })
        .collect()
}

/// Value at a pole of a quantity that is even in the distance to that pole,
/// extrapolated from the three nearest interior nodes as a quadratic in `x²`.
#[inline]
pub(crate) fn even_pole_extrapolation(k1: f64, k2: f64, k3: f64) -> f64 {
    1.5 * k1 - 0.6 * k2 + 0.1 * k3
}
