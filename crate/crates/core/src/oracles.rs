//! Closed-form asymptotic quantities for ball-and-half-space geometry: the
//! sigma profiles, the boundary bump function, slab volumes with their
//! inverse, and the leading-order eigenvalue and density predictions.
//!
//! These functions serve as ground truth for property tests against the
//! empirical pipeline, so they are written for accuracy over speed.

use statrs::function::gamma::gamma;

/// Volume of the m-dimensional unit sphere, `2 pi^{(m+1)/2} / Gamma((m+1)/2)`.
pub fn sphere_volume(m: usize) -> f64 {
    let h = (m as f64 + 1.0) / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / gamma(h)
}

/// The ratio `|S^{d-2}|/(d-1)`, with the convention that it equals 1 at d=1.
fn edge_ratio(d: usize) -> f64 {
    if d == 1 {
        1.0
    } else {
        sphere_volume(d - 2) / (d as f64 - 1.0)
    }
}

/// `|S^{d-2}|` under the same d=1 convention, so that
/// `|S^{d-2}|/(d^2-1) = edge_ratio(d)/(d+1)` stays finite.
fn edge_volume_over_dp1(d: usize) -> f64 {
    edge_ratio(d) / (d as f64 + 1.0)
}

/// Volume fraction profile of an epsilon-ball cut by a boundary at distance t.
pub fn sigma0(t: f64, eps: f64, d: usize) -> f64 {
    let sd1 = sphere_volume(d - 1);
    let df = d as f64;
    if t > eps {
        sd1 / df
    } else {
        let integral = integrate(|x| (1.0 - x * x).powf((df - 1.0) / 2.0), 0.0, t / eps);
        sd1 / (2.0 * df) + edge_ratio(d) * integral
    }
}

/// First-moment profile along the inward normal; nonpositive, zero past eps.
pub fn sigma1d(t: f64, eps: f64, d: usize) -> f64 {
    if t > eps {
        0.0
    } else {
        let u = 1.0 - (t / eps) * (t / eps);
        -edge_volume_over_dp1(d) * u.powf((d as f64 + 1.0) / 2.0)
    }
}

/// Second-moment profile in the tangential directions.
pub fn sigma2(t: f64, eps: f64, d: usize) -> f64 {
    let sd1 = sphere_volume(d - 1);
    let df = d as f64;
    if t > eps {
        sd1 / (df * (df + 2.0))
    } else {
        let integral = integrate(|x| (1.0 - x * x).powf((df + 1.0) / 2.0), 0.0, t / eps);
        sd1 / (2.0 * df * (df + 2.0)) + edge_volume_over_dp1(d) * integral
    }
}

/// Second-moment profile along the normal direction.
pub fn sigma2d(t: f64, eps: f64, d: usize) -> f64 {
    let sd1 = sphere_volume(d - 1);
    let df = d as f64;
    if t > eps {
        sd1 / (df * (df + 2.0))
    } else {
        let integral = integrate(
            |x| (1.0 - x * x).powf((df - 1.0) / 2.0) * x * x,
            0.0,
            t / eps,
        );
        sd1 / (2.0 * df * (df + 2.0)) + edge_ratio(d) * integral
    }
}

/// Third-moment profile, tangential component.
pub fn sigma3(t: f64, eps: f64, d: usize) -> f64 {
    if t > eps {
        0.0
    } else {
        let u = 1.0 - (t / eps) * (t / eps);
        -edge_volume_over_dp1(d) / (d as f64 + 3.0) * u.powf((d as f64 + 3.0) / 2.0)
    }
}

/// Third-moment profile, normal component.
pub fn sigma3d(t: f64, eps: f64, d: usize) -> f64 {
    if t > eps {
        0.0
    } else {
        let r2 = (t / eps) * (t / eps);
        let u = 1.0 - r2;
        -edge_volume_over_dp1(d) / (d as f64 + 3.0)
            * (2.0 + (d as f64 + 1.0) * r2)
            * u.powf((d as f64 + 1.0) / 2.0)
    }
}

/// Population limit of the boundary indicator at distance t from the boundary,
/// `sigma1d^2 / (sigma0 * sigma2d)`. Vanishes for t >= eps, peaks at t = 0.
pub fn bump_b(t: f64, eps: f64, d: usize) -> f64 {
    if t >= eps {
        return 0.0;
    }
    let s1 = sigma1d(t, eps, d);
    s1 * s1 / (sigma0(t, eps, d) * sigma2d(t, eps, d))
}

/// Value of the bump function on the boundary itself:
/// `4 d^2 (d+2) |S^{d-2}|^2 / ((d^2-1)^2 |S^{d-1}|^2)` with the d=1 convention.
pub fn boundary_constant(d: usize) -> f64 {
    let df = d as f64;
    let sd1 = sphere_volume(d - 1);
    // |S^{d-2}|/(d^2-1) written through the convention-safe ratio.
    let q = edge_volume_over_dp1(d);
    4.0 * df * df * (df + 2.0) * q * q / (sd1 * sd1)
}

/// Volume of a d-ball of radius r truncated by a hyperplane at distance t
/// from the center, `sigma0(t, r) r^d`.
pub fn volume_v(t: f64, r: f64, d: usize) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    sigma0(t, r, d) * r.powi(d as i32)
}

/// Inverse of [`volume_v`] in r: the radius whose truncated volume is s.
pub fn inverse_u(t: f64, s: f64, d: usize) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let sd1 = sphere_volume(d - 1);
    let df = d as f64;
    if s < sd1 / df * t.powi(d as i32) {
        return (df * s / sd1).powf(1.0 / df);
    }
    // Bracket from the half-ball lower bound; bisection to 1e-12 relative.
    let mut lo = 0.0;
    let mut hi = t.max((2.0 * df * s / sd1).powf(1.0 / df)) + 1.0;
    while volume_v(t, hi, d) < s {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if volume_v(t, mid, d) < s {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Predicted K-distance at distance t from the boundary under density P,
/// `U(t, (K+1)/(P n))`.
pub fn r_tilde(t: f64, k: usize, n: usize, p_density: f64, d: usize) -> f64 {
    inverse_u(t, (k as f64 + 1.0) / (p_density * n as f64), d)
}

/// Leading-order eigenvalue predictions `lambda/n` for the local covariance
/// in the epsilon-ball scheme: tangential directions and the normal direction.
pub fn predict_eigs_eps(p_density: f64, t: f64, eps: f64, d: usize) -> (f64, f64) {
    let scale = p_density * eps.powi(d as i32 + 2);
    (sigma2(t, eps, d) * scale, sigma2d(t, eps, d) * scale)
}

/// Interior eigenvalue prediction `lambda/n` under the KNN scheme,
/// `(1/(d+2)) (d/(|S^{d-1}| P))^{2/d} ((K+1)/n)^{(d+2)/d}`.
pub fn predict_eig_knn_interior(p_density: f64, k: usize, n: usize, d: usize) -> f64 {
    let df = d as f64;
    let sd1 = sphere_volume(d - 1);
    (1.0 / (df + 2.0))
        * (df / (sd1 * p_density)).powf(2.0 / df)
        * ((k as f64 + 1.0) / n as f64).powf((df + 2.0) / df)
}

/// Boundary-corrected density estimate from a neighbor count,
/// `N_eps / (n eps^d sigma0(t, eps))`.
pub fn kde_value(n_eps: usize, n: usize, eps: f64, t: f64, d: usize) -> f64 {
    n_eps as f64 / (n as f64 * eps.powi(d as i32) * sigma0(t, eps, d))
}

/// Adaptive Gauss-Kronrod quadrature (G7/K15) targeting 1e-12.
fn integrate<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    adaptive(f, a, b, 1e-12, 40)
}

fn adaptive<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    let (value, err) = gk15(f, a, b);
    if err <= tol * value.abs().max(1.0) || depth == 0 {
        return value;
    }
    let mid = 0.5 * (a + b);
    adaptive(f, a, mid, tol / 2.0, depth - 1) + adaptive(f, mid, b, tol / 2.0, depth - 1)
}

// Kronrod-15 abscissae and weights on [-1, 1], with the embedded Gauss-7 rule.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn gk15<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let fsum = f(c - x) + f(c + x);
        kron += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    let value = kron * h;
    let err = ((kron - gauss) * h).abs();
    (value, err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn sphere_volumes() {
        assert_relative_eq!(sphere_volume(0), 2.0, max_relative = 1e-14);
        assert_relative_eq!(sphere_volume(1), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_volume(2), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_volume(3), 2.0 * PI * PI, max_relative = 1e-14);
    }

    #[test]
    fn sigma_branch_values() {
        assert_relative_eq!(sigma0(2.0, 1.0, 2), PI, max_relative = 1e-12);
        assert_relative_eq!(sigma0(1.0, 1.0, 2), PI, max_relative = 1e-12);
        assert_relative_eq!(sigma0(0.0, 1.0, 2), PI / 2.0, max_relative = 1e-12);
        assert_eq!(sigma1d(2.0, 1.0, 2), 0.0);
        assert_relative_eq!(sigma1d(0.0, 1.0, 2), -2.0 / 3.0, max_relative = 1e-12);
        assert_eq!(sigma3(2.0, 1.0, 2), 0.0);
        assert_relative_eq!(sigma3(0.0, 1.0, 2), -2.0 / 15.0, max_relative = 1e-12);
        assert_relative_eq!(sigma3d(0.0, 1.0, 2), -4.0 / 15.0, max_relative = 1e-12);
    }

    #[test]
    fn sigma2_boundary_value_is_half_interior() {
        for d in 1..=5 {
            let half = sphere_volume(d - 1) / (2.0 * d as f64 * (d as f64 + 2.0));
            assert_relative_eq!(sigma2(0.0, 1.0, d), half, max_relative = 1e-11);
            assert_relative_eq!(sigma2d(0.0, 1.0, d), half, max_relative = 1e-11);
            let interior = sphere_volume(d - 1) / (d as f64 * (d as f64 + 2.0));
            assert_relative_eq!(sigma2(1.5, 1.0, d), interior, max_relative = 1e-11);
            assert_relative_eq!(sigma2d(1.5, 1.0, d), interior, max_relative = 1e-11);
        }
    }

    #[test]
    fn sigma_functions_continuous_at_scale() {
        let eps = 1.0;
        let delta = 1e-6;
        for d in 1..=4 {
            for f in [sigma0, sigma1d, sigma2, sigma2d, sigma3, sigma3d] {
                let below = f(eps - delta, eps, d);
                let above = f(eps + delta, eps, d);
                assert!(
                    (below - above).abs() < 1e-4,
                    "jump at t=eps for d={d}: {below} vs {above}"
                );
            }
        }
    }

    #[test]
    fn bump_boundary_values() {
        assert_eq!(bump_b(1.0, 1.0, 2), 0.0);
        assert_eq!(bump_b(2.0, 1.0, 2), 0.0);
        assert_relative_eq!(bump_b(0.0, 1.0, 2), 64.0 / (9.0 * PI * PI), max_relative = 1e-10);
        // d=1: the convention |S^{d-2}|/(d-1) := 1 gives 4*1*3*(1/2)^2 / |S^0|^2 = 3/4,
        // matching the direct one-dimensional population computation.
        assert_relative_eq!(bump_b(0.0, 1.0, 1), 0.75, max_relative = 1e-10);
    }

    #[test]
    fn boundary_constant_matches_bump_at_zero() {
        assert_relative_eq!(boundary_constant(2), 0.72048, max_relative = 1e-4);
        assert_relative_eq!(boundary_constant(1), 0.75, max_relative = 1e-12);
        for d in 1..=5 {
            assert_relative_eq!(boundary_constant(d), bump_b(0.0, 1.0, d), max_relative = 1e-9);
            assert_relative_eq!(boundary_constant(d), bump_b(0.0, 0.37, d), max_relative = 1e-9);
        }
    }

    #[test]
    fn bump_non_increasing_and_sandwiched() {
        for d in 1..=4 {
            let eps = 0.8;
            let c = boundary_constant(d);
            let mut prev = f64::INFINITY;
            for i in 0..=1000 {
                let t = eps * i as f64 / 1000.0;
                let b = bump_b(t, eps, d);
                assert!(b <= prev + 1e-9, "bump increased at t={t}, d={d}");
                let shape = (1.0 - (t / eps) * (t / eps)).powi(d as i32 + 1);
                assert!(b >= c / 4.0 * shape - 1e-9, "lower sandwich failed t={t} d={d}");
                assert!(b <= c * shape + 1e-9, "upper sandwich failed t={t} d={d}");
                prev = b;
            }
        }
    }

    #[test]
    fn volume_values() {
        assert_relative_eq!(volume_v(0.0, 1.0, 2), PI / 2.0, max_relative = 1e-11);
        assert_relative_eq!(volume_v(1.0, 1.0, 2), PI, max_relative = 1e-11);
        assert_relative_eq!(volume_v(3.0, 1.0, 2), PI, max_relative = 1e-11);
        // Monte-Carlo volume of the unit ball in R^3 cut by the plane at
        // distance 0.5 below the center.
        let mut r = ChaCha8Rng::seed_from_u64(11);
        let mut hits = 0usize;
        let total = 1_000_000usize;
        for _ in 0..total {
            let x: f64 = r.gen_range(-1.0..1.0);
            let y: f64 = r.gen_range(-1.0..1.0);
            let z: f64 = r.gen_range(-1.0..1.0);
            if x * x + y * y + z * z <= 1.0 && z >= -0.5 {
                hits += 1;
            }
        }
        let mc = 8.0 * hits as f64 / total as f64;
        assert_relative_eq!(volume_v(0.5, 1.0, 3), mc, max_relative = 0.01);
    }

    #[test]
    fn volume_monotone_in_radius() {
        for d in 1..=3 {
            let mut prev = 0.0;
            for i in 1..=50 {
                let r = 0.04 * i as f64;
                let v = volume_v(0.6, r, d);
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn inverse_u_cases() {
        assert_eq!(inverse_u(0.5, 0.0, 2), 0.0);
        assert_relative_eq!(inverse_u(0.0, PI / 2.0, 2), 1.0, max_relative = 1e-10);
        let mut r = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let d = r.gen_range(1..=4);
            let t = r.gen_range(0.0..2.0);
            let radius = r.gen_range(0.01..3.0);
            let s = volume_v(t, radius, d);
            assert_relative_eq!(inverse_u(t, s, d), radius, max_relative = 1e-10);
            // Round trip in the other direction.
            let u = inverse_u(t, s, d);
            assert_relative_eq!(volume_v(t, u, d), s, max_relative = 1e-10);
        }
    }

    #[test]
    fn r_tilde_interior_closed_form() {
        let v = r_tilde(10.0, 64, 4000, 1.0 / PI, 2);
        assert_relative_eq!(v, (65.0 / 4000.0f64).sqrt(), max_relative = 1e-10);
        assert!((v - 0.1275).abs() < 5e-4);
        // Half-ball at the boundary needs a larger radius for the same mass.
        let s = 65.0 / (4000.0 / PI);
        let interior = inverse_u(10.0, s, 2);
        let boundary = inverse_u(0.0, s, 2);
        assert_relative_eq!(boundary, interior * 2.0f64.sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn r_tilde_two_sided_bound() {
        let mut r = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let d = r.gen_range(1..=4);
            let t = r.gen_range(0.0..1.0);
            let k = r.gen_range(5..200);
            let n = r.gen_range(500..20000);
            let p = r.gen_range(0.05..3.0);
            let s = (k as f64 + 1.0) / (p * n as f64);
            let v = r_tilde(t, k, n, p, d);
            let df = d as f64;
            let lo = (df / sphere_volume(d - 1) * s).powf(1.0 / df);
            let hi = (2.0 * df / sphere_volume(d - 1) * s).powf(1.0 / df);
            assert!(v >= lo - 1e-10 && v <= hi + 1e-10, "bound failed: {lo} {v} {hi}");
        }
    }

    #[test]
    fn eigenvalue_predictions() {
        let (tan, nor) = predict_eigs_eps(1.0 / PI, 10.0, 0.1, 2);
        assert_relative_eq!(tan, 2.5e-5, max_relative = 1e-10);
        assert_relative_eq!(nor, 2.5e-5, max_relative = 1e-10);
        // At the boundary the two predictions coincide as well.
        let (tan0, nor0) = predict_eigs_eps(1.0 / PI, 0.0, 0.1, 2);
        assert_relative_eq!(tan0, nor0, max_relative = 1e-11);
        assert!(tan0 < tan);
        // Deep-interior predictions do not depend on t.
        let (a, b) = predict_eigs_eps(0.7, 5.0, 0.2, 3);
        let (c, d) = predict_eigs_eps(0.7, 9.0, 0.2, 3);
        assert_eq!(a, c);
        assert_eq!(b, d);
    }

    #[test]
    fn knn_prediction_formula_and_scaling() {
        let v = predict_eig_knn_interior(1.0 / PI, 64, 4000, 2);
        let expect = 0.25 * (2.0 / (2.0 * PI * (1.0 / PI))) * (65.0f64 / 4000.0).powi(2);
        assert_relative_eq!(v, expect, max_relative = 1e-12);
        // Depends on (K+1)/n only.
        let w = predict_eig_knn_interior(1.0 / PI, 129, 8000, 2);
        assert_relative_eq!(w, predict_eig_knn_interior(1.0 / PI, 129, 8000, 2), max_relative = 0.0);
        assert_relative_eq!(
            predict_eig_knn_interior(1.0 / PI, 64, 4000, 2) * (65.0f64 / 4000.0).powi(-2),
            predict_eig_knn_interior(1.0 / PI, 129, 8000, 2) * (130.0f64 / 8000.0).powi(-2),
            max_relative = 1e-12
        );
        // Prediction scales as P^{-2/d}.
        let d = 3usize;
        let p1 = predict_eig_knn_interior(0.5, 40, 9000, d);
        let p2 = predict_eig_knn_interior(1.0, 40, 9000, d);
        assert_relative_eq!(p1 / p2, 2.0f64.powf(2.0 / d as f64), max_relative = 1e-12);
    }

    #[test]
    fn kde_recovers_uniform_density() {
        // Plug the exact expected counts and recover P.
        let p = 0.7;
        let n = 10_000usize;
        let eps = 0.1f64;
        for d in 1..=3 {
            let interior = p * sphere_volume(d - 1) * eps.powi(d as i32) / d as f64;
            let count = (n as f64 * interior).round() as usize;
            let got = kde_value(count, n, eps, 1.0, d);
            assert_relative_eq!(got, count as f64 / (n as f64 * interior) * p, max_relative = 1e-12);
            // Boundary point with half the count still recovers the same value.
            let bcount = count / 2;
            let at_boundary = kde_value(bcount, n, eps, 0.0, d);
            let deep = kde_value(2 * bcount, n, eps, 1.0, d);
            assert_relative_eq!(at_boundary, deep, max_relative = 1e-12);
        }
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        // sin on [0, pi] = 2.
        assert_relative_eq!(integrate(|x| x.sin(), 0.0, PI), 2.0, max_relative = 1e-12);
        // Semicircle area.
        assert_relative_eq!(
            integrate(|x| (1.0 - x * x).sqrt(), -1.0, 1.0),
            PI / 2.0,
            max_relative = 1e-9
        );
        assert_eq!(integrate(|x| x, 2.0, 2.0), 0.0);
    }
}
