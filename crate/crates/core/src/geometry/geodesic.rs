//! Distances on the meridian surface of revolution `ds² + ψ(s)²dθ²`.
//!
//! Any two points of `Sⁿ` lie on a common totally geodesic 2-sphere through
//! both poles, so distances reduce to this surface. `ψ` is taken piecewise
//! linear in arclength between nodes; on each such cone frustum the Clairaut
//! integrals for angle swept and length travelled have closed forms, so a
//! geodesic with Clairaut constant `c = ψ sin β` is evaluated exactly and
//! the two-point problem becomes a one-dimensional root find in `c`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{arclength_unchecked, hermite, WarpedProfile};
use crate::error::Result;

/// A point on the meridian 2-sphere: coordinate `x ∈ [0, 1]` and angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeridianPoint {
    pub x: f64,
    pub angle: f64,
}

impl MeridianPoint {
    pub fn new(x: f64, angle: f64) -> Self {
        Self { x, angle }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistanceMethod {
    /// Clairaut-constant root find succeeded.
    Shooting,
    /// No geodesic family bracketed the angle; graph shortest path used.
    GraphFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distance {
    pub length: f64,
    pub method: DistanceMethod,
}

impl Distance {
    pub fn reduced_accuracy(&self) -> bool {
        self.method == DistanceMethod::GraphFallback
    }
}

const SCAN: usize = 40;
const BISECT: usize = 300;

/// Precomputed meridian surface of one profile.
#[derive(Debug, Clone)]
pub struct MeridianSurface {
    x: Vec<f64>,
    phi: Vec<f64>,
    s: Vec<f64>,
    psi: Vec<f64>,
    total: f64,
}

impl MeridianSurface {
    pub fn new(profile: &WarpedProfile) -> Self {
        let s = arclength_unchecked(profile);
        let total = *s.last().unwrap();
        Self {
            x: profile.grid.clone(),
            phi: profile.phi.clone(),
            s,
            psi: profile.psi.clone(),
            total,
        }
    }

    /// Pole-to-pole length.
    pub fn length(&self) -> f64 {
        self.total
    }

    pub fn nodes_s(&self) -> &[f64] {
        &self.s
    }

    pub fn s_of_x(&self, x: f64) -> f64 {
        hermite(&self.x, &self.s, &self.phi, x.clamp(0.0, 1.0)).clamp(0.0, self.total)
    }

    pub fn x_of_s(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.total);
        let j = self.segment(s);
        let (mut lo, mut hi) = (self.x[j], self.x[j + 1]);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.s_of_x(mid) < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Piecewise-linear `ψ(s)`.
    pub fn psi_at(&self, s: f64) -> f64 {
        if s <= 0.0 || s >= self.total {
            return 0.0;
        }
        let j = self.segment(s);
        let t = (s - self.s[j]) / (self.s[j + 1] - self.s[j]);
        self.psi[j] + t * (self.psi[j + 1] - self.psi[j])
    }

    fn segment(&self, s: f64) -> usize {
        let last = self.s.len() - 1;
        match self.s.partition_point(|&v| v <= s) {
            0 => 0,
            k => (k - 1).min(last - 1),
        }
    }

    pub fn distance(&self, a: MeridianPoint, b: MeridianPoint) -> Distance {
        let alpha = angle_gap(a.angle, b.angle);
        self.distance_s(self.s_of_x(a.x), self.s_of_x(b.x), alpha)
    }

    /// Distance between `(s_a, 0)` and `(s_b, α)` with `α ∈ [0, π]`.
    pub fn distance_s(&self, sa: f64, sb: f64, alpha: f64) -> Distance {
        let (length, solved) = self.solve(sa, sb, alpha, f64::INFINITY);
        if solved {
            return Distance {
                length,
                method: DistanceMethod::Shooting,
            };
        }
        let graph = self.graph_distance(sa, sb, alpha);
        Distance {
            length: length.min(graph),
            method: DistanceMethod::GraphFallback,
        }
    }

    /// Like [`Self::distance_s`] but only resolves distances up to `cap`;
    /// anything longer may come back as `+∞` or as an upper bound above `cap`.
    pub(crate) fn distance_capped(&self, sa: f64, sb: f64, alpha: f64, cap: f64) -> f64 {
        let (length, solved) = self.solve(sa, sb, alpha, cap);
        if solved || length > cap * (1.0 + 1e-9) {
            length
        } else {
            length.min(self.graph_distance(sa, sb, alpha))
        }
    }

    fn solve(&self, sa: f64, sb: f64, alpha: f64, cap: f64) -> (f64, bool) {
        let l = self.total;
        let sa = sa.clamp(0.0, l);
        let sb = sb.clamp(0.0, l);
        let (lo, hi) = if sa <= sb { (sa, sb) } else { (sb, sa) };
        let meridian = hi - lo;
        let at_pole = |s: f64| s <= 0.0 || s >= l;
        let mut alpha = alpha.abs().min(PI);
        if at_pole(sa) || at_pole(sb) {
            alpha = 0.0;
        }
        let scale = l.max(f64::MIN_POSITIVE);
        if alpha <= 1e-15 {
            return (meridian, true);
        }
        if meridian > cap {
            return (f64::INFINITY, true);
        }

        // Curves that are always available: over either pole, and along a
        // parallel when both points share a level.
        let mut best = (lo + hi).min(2.0 * l - lo - hi);
        let mut solved = (alpha - PI).abs() <= 1e-12;
        if meridian <= 1e-14 * scale {
            let psi0 = self.psi_at(lo);
            best = best.min(psi0 * alpha);
            let eps = 1e-7 * scale;
            if self.psi_at(lo - eps) <= psi0 && self.psi_at(lo + eps) <= psi0 {
                solved = true;
            }
            if self.psi_at(lo - eps) >= psi0 && self.psi_at(lo + eps) >= psi0 {
                solved = true;
            }
        }

        let m = self.min_psi(lo, hi);
        if m > 0.0 {
            // Monotone geodesics from lo to hi, c ∈ [0, m].
            if meridian > 0.0 {
                let (theta_max, _) = self.integrate(lo, hi, m);
                if theta_max >= alpha {
                    let c = bisect(0.0, m, |c| self.integrate(lo, hi, c).0 - alpha);
                    best = best.min(self.integrate(lo, hi, c).1);
                    solved = true;
                }
            }
            // Geodesics turning once beyond hi, or once below lo.
            for beyond in [true, false] {
                if let Some(len) = self.turning_family(lo, hi, m, alpha, cap, beyond) {
                    best = best.min(len);
                    solved = true;
                }
            }
        }
        (best, solved)
    }

    fn turning_family(
        &self,
        lo: f64,
        hi: f64,
        m: f64,
        alpha: f64,
        cap: f64,
        beyond: bool,
    ) -> Option<f64> {
        let eval = |c: f64| -> Option<(f64, f64)> {
            let turn = if beyond {
                self.crossing_after(hi, c)
            } else {
                self.crossing_before(lo, c)
            };
            let reach = if beyond {
                2.0 * turn - lo - hi
            } else {
                lo + hi - 2.0 * turn
            };
            if reach > cap {
                return None;
            }
            let (t1, l1) = if beyond {
                self.integrate(lo, turn, c)
            } else {
                self.integrate(turn, hi, c)
            };
            let (t2, l2) = if beyond {
                self.integrate(hi, turn, c)
            } else {
                self.integrate(turn, lo, c)
            };
            Some((t1 + t2, l1 + l2))
        };

        let mut samples: Vec<f64> = (3..10).map(|p| m * 10f64.powi(-p)).rev().collect();
        samples.extend((1..SCAN).map(|k| {
            let u = (k as f64 / SCAN as f64) * PI / 2.0;
            m * u.sin().powi(2)
        }));
        samples.push(m * (1.0 - 1e-12));

        let mut best: Option<f64> = None;
        let mut prev: Option<(f64, f64)> = None;
        for &c in &samples {
            let Some((theta, _)) = eval(c) else {
                prev = None;
                continue;
            };
            let g = theta - alpha;
            if let Some((cp, gp)) = prev {
                if gp == 0.0 || gp.signum() != g.signum() {
                    let root = bisect(cp, c, |c| eval(c).map_or(f64::NAN, |(t, _)| t - alpha));
                    if let Some((_, len)) = eval(root) {
                        best = Some(best.map_or(len, |b: f64| b.min(len)));
                    }
                }
            }
            prev = Some((c, g));
        }
        best
    }

    /// First `s > from` with `ψ(s) = c`, given `ψ(from) > c`.
    fn crossing_after(&self, from: f64, c: f64) -> f64 {
        let last = self.s.len() - 1;
        let mut j = self.segment(from) + 1;
        while j < last && self.psi[j] > c {
            j += 1;
        }
        let (s0, p0) = if self.s[j - 1] > from {
            (self.s[j - 1], self.psi[j - 1])
        } else {
            (from, self.psi_at(from))
        };
        let (s1, p1) = (self.s[j], self.psi[j]);
        if p0 <= p1 {
            return s1;
        }
        (s0 + (s1 - s0) * (p0 - c) / (p0 - p1)).clamp(s0, s1)
    }

    /// Last `s < from` with `ψ(s) = c`, given `ψ(from) > c`.
    fn crossing_before(&self, from: f64, c: f64) -> f64 {
        let mut j = self.segment(from);
        if self.s[j] >= from && j > 0 {
            j -= 1;
        }
        while j > 0 && self.psi[j] > c {
            j -= 1;
        }
        let (s1, p1) = if self.s[j + 1] < from {
            (self.s[j + 1], self.psi[j + 1])
        } else {
            (from, self.psi_at(from))
        };
        let (s0, p0) = (self.s[j], self.psi[j]);
        if p1 <= p0 {
            return s0;
        }
        (s1 - (s1 - s0) * (p1 - c) / (p1 - p0)).clamp(s0, s1)
    }

    fn min_psi(&self, lo: f64, hi: f64) -> f64 {
        let mut m = self.psi_at(lo).min(self.psi_at(hi));
        for (s, p) in self.s.iter().zip(&self.psi) {
            if *s > lo && *s < hi {
                m = m.min(*p);
            }
        }
        m
    }

    /// Angle swept and length of the Clairaut geodesic with constant `c`
    /// between levels `a ≤ b`, assuming `ψ ≥ c` on `[a, b]`.
    fn integrate(&self, a: f64, b: f64, c: f64) -> (f64, f64) {
        if b <= a {
            return (0.0, 0.0);
        }
        let mut theta = 0.0;
        let mut len = 0.0;
        let mut j = self.segment(a);
        let mut s0 = a;
        let mut p0 = self.psi_at(a);
        loop {
            let end = self.s[j + 1].min(b);
            let p1 = if end >= b { self.psi_at(b) } else { self.psi[j + 1] };
            if end > s0 {
                let (t, l) = frustum(end - s0, p0, p1, c);
                theta += t;
                len += l;
            }
            if end >= b || j + 2 >= self.s.len() {
                break;
            }
            s0 = end;
            p0 = p1;
            j += 1;
        }
        (theta, len)
    }

    /// Dijkstra on a `(node, angle)` mesh over the half meridian `θ ∈ [0, π]`.
    fn graph_distance(&self, sa: f64, sb: f64, alpha: f64) -> f64 {
        const M: usize = 96;
        let nodes = self.s.len();
        let dtheta = PI / M as f64;
        let nearest = |s: f64| {
            let j = self.segment(s);
            if (s - self.s[j]).abs() <= (self.s[j + 1] - s).abs() {
                j
            } else {
                j + 1
            }
        };
        let ia = nearest(sa);
        let ib = nearest(sb);
        let jb = ((alpha / dtheta).round() as usize).min(M);
        let id = |i: usize, j: usize| i * (M + 1) + j;
        let mut dist = vec![f64::INFINITY; nodes * (M + 1)];
        let mut heap = BinaryHeap::new();
        dist[id(ia, 0)] = 0.0;
        heap.push(HeapItem(0.0, ia, 0));
        const STEPS: [(i64, i64); 16] = [
            (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1),
            (2, 1), (2, -1), (-2, 1), (-2, -1), (1, 2), (1, -2), (-1, 2), (-1, -2),
        ];
        while let Some(HeapItem(d, i, j)) = heap.pop() {
            if d > dist[id(i, j)] {
                continue;
            }
            if i == ib && j == jb {
                break;
            }
            let pole = i == 0 || i == nodes - 1;
            if pole {
                // every angle at a pole is the same point
                for jj in 0..=M {
                    if dist[id(i, jj)] > d {
                        dist[id(i, jj)] = d;
                        heap.push(HeapItem(d, i, jj));
                    }
                }
            }
            for (di, dj) in STEPS {
                let ni = i as i64 + di;
                let nj = j as i64 + dj;
                if ni < 0 || ni >= nodes as i64 || nj < 0 || nj > M as i64 {
                    continue;
                }
                let (ni, nj) = (ni as usize, nj as usize);
                let ds = self.s[ni] - self.s[i];
                let pm = 0.5 * (self.psi[ni] + self.psi[i]);
                let w = (ds * ds + (pm * dj as f64 * dtheta).powi(2)).sqrt();
                let nd = d + w;
                if nd < dist[id(ni, nj)] {
                    dist[id(ni, nj)] = nd;
                    heap.push(HeapItem(nd, ni, nj));
                }
            }
        }
        dist[id(ib, jb)]
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, usize, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0)
    }
}

/// `|θa − θb|` reduced to `[0, π]`.
pub(crate) fn angle_gap(a: f64, b: f64) -> f64 {
    // fixed operand order so the gap is bitwise symmetric
    let (a, b) = if a >= b { (a, b) } else { (b, a) };
    let g = (a - b).rem_euclid(2.0 * PI);
    g.min(2.0 * PI - g)
}

/// Clairaut integrals over one cone frustum of slant length `ds` with radii
/// `p1`, `p2` at its ends: returns `(∫ c/(ψ√(ψ²−c²)) ds, ∫ ψ/√(ψ²−c²) ds)`.
/// Written without differences of nearly equal quantities so the flat
/// (`p1 = p2`) case needs no special branch.
fn frustum(ds: f64, p1: f64, p2: f64, c: f64) -> (f64, f64) {
    if c <= 0.0 {
        return (0.0, ds);
    }
    let r1 = (p1 * p1 - c * c).max(0.0).sqrt();
    let r2 = (p2 * p2 - c * c).max(0.0).sqrt();
    let sum = r1 + r2;
    if sum <= 0.0 {
        return (f64::INFINITY, f64::INFINITY);
    }
    let len = ds * (p1 + p2) / sum;
    let cden = c + r1 * r2 / c;
    let z = (p2 * p2 - p1 * p1) / (sum * cden);
    let atanc = if z.abs() < 1e-8 { 1.0 - z * z / 3.0 } else { z.atan() / z };
    let theta = ds * (p1 + p2) / (sum * cden) * atanc;
    (theta, len)
}

/// Root of `f` on `[a, b]`, where `f(a)` and `f(b)` differ in sign.
///
/// Illinois-modified regula falsi: superlinear on smooth brackets, and a
/// NaN value (a trial point outside the domain of `f`) is treated as lying
/// on the `b` side, followed by a plain bisection step.
pub(crate) fn bisect(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (a, b);
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return plain_bisect(lo, hi, flo < 0.0, &f);
    }
    let mut side = 0i8;
    let mut force_bisect = false;
    for _ in 0..BISECT {
        let width = hi - lo;
        if width <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) || width <= f64::MIN_POSITIVE {
            break;
        }
        let mut x = if force_bisect {
            0.5 * (lo + hi)
        } else {
            (lo * fhi - hi * flo) / (fhi - flo)
        };
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        force_bisect = false;
        let fx = f(x);
        if fx.is_nan() {
            hi = x;
            fhi = f64::NAN;
            force_bisect = true;
            continue;
        }
        if fx == 0.0 {
            return x;
        }
        if fhi.is_nan() {
            // no usable value at the upper end yet
            if fx.signum() == flo.signum() {
                lo = x;
                flo = fx;
            } else {
                hi = x;
                fhi = fx;
            }
            force_bisect = true;
            continue;
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    if fhi.is_nan() {
        lo
    } else if flo.abs() <= fhi.abs() {
        lo
    } else {
        hi
    }
}

fn plain_bisect(a: f64, b: f64, neg_at_lo: bool, f: &impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (a, b);
    for _ in 0..BISECT {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm.is_nan() {
            hi = mid;
            continue;
        }
        if (fm < 0.0) == neg_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Minimizing geodesic length between two meridian points.
pub fn geodesic_distance(
    profile: &WarpedProfile,
    a: MeridianPoint,
    b: MeridianPoint,
) -> Result<Distance> {
    profile.validate()?;
    Ok(MeridianSurface::new(profile).distance(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::round_sphere;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sphere_distance(x1: f64, t1: f64, x2: f64, t2: f64) -> f64 {
        // unit sphere: polar angle πx, azimuth t
        let (a, b) = (PI * x1, PI * x2);
        let cos = a.cos() * b.cos() + a.sin() * b.sin() * (t1 - t2).cos();
        cos.clamp(-1.0, 1.0).acos()
    }

    #[test]
    fn identity_and_poles() {
        let p = round_sphere(3, 1.0, 200);
        let a = MeridianPoint::new(0.3, 0.7);
        assert_eq!(geodesic_distance(&p, a, a).unwrap().length, 0.0);
        let d = geodesic_distance(&p, MeridianPoint::new(0.0, 0.0), MeridianPoint::new(1.0, 2.0))
            .unwrap();
        assert!((d.length - PI).abs() < 1e-3);
    }

    #[test]
    fn equator_arc() {
        let p = round_sphere(3, 1.0, 200);
        for alpha in [0.1, 0.9, 2.0, 3.0] {
            let d = geodesic_distance(
                &p,
                MeridianPoint::new(0.5, 0.0),
                MeridianPoint::new(0.5, alpha),
            )
            .unwrap();
            assert!((d.length - alpha).abs() < 1e-3, "{alpha}: {}", d.length);
        }
    }

    #[test]
    fn frustum_flat_limit() {
        let (t, l) = frustum(0.5, 2.0, 2.0, 1.0);
        assert!((l - 0.5 * 2.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((t - 0.5 / (2.0 * 3f64.sqrt())).abs() < 1e-15);
        let (t2, l2) = frustum(0.5, 2.0, 2.0 + 1e-9, 1.0);
        assert!((t - t2).abs() < 1e-9 && (l - l2).abs() < 1e-9);
    }

    #[test]
    fn random_pairs_match_great_circles() {
        let p = round_sphere(3, 1.0, 400);
        let surf = MeridianSurface::new(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let (x1, x2) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            let (t1, t2) = (rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
            let d = surf.distance(MeridianPoint::new(x1, t1), MeridianPoint::new(x2, t2));
            let exact = sphere_distance(x1, t1, x2, t2);
            assert!(
                (d.length - exact).abs() < 2e-4,
                "({x1},{t1}) ({x2},{t2}): {} vs {exact} ({:?})",
                d.length,
                d.method
            );
        }
    }

    #[test]
    fn graph_fallback_is_close() {
        let p = round_sphere(3, 1.0, 200);
        let surf = MeridianSurface::new(&p);
        let g = surf.graph_distance(surf.s_of_x(0.3), surf.s_of_x(0.6), 1.0);
        let exact = sphere_distance(0.3, 0.0, 0.6, 1.0);
        assert!((g - exact).abs() < 0.05 * exact, "{g} {exact}");
        assert!(g >= exact - 1e-3);
    }

    #[test]
    fn symmetric_and_triangle() {
        let p = crate::flow::dumbbell_profile(3, 400, &crate::flow::DumbbellParams::default())
            .unwrap();
        let surf = MeridianSurface::new(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<MeridianPoint> = (0..24)
            .map(|_| MeridianPoint::new(rng.gen_range(0.0..1.0), rng.gen_range(-PI..PI)))
            .collect();
        let tol = 1e-6 + 1e-4;
        for a in &pts {
            for b in &pts {
                let dab = surf.distance(*a, *b).length;
                let dba = surf.distance(*b, *a).length;
                assert!((dab - dba).abs() < 1e-9, "{dab} {dba} {a:?} {b:?}");
                for c in pts.iter().take(8) {
                    let dac = surf.distance(*a, *c).length;
                    let dcb = surf.distance(*c, *b).length;
                    assert!(dab <= dac + dcb + tol, "triangle {dab} > {dac} + {dcb}");
                }
            }
        }
    }
}
