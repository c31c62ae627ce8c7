//! Small numerical helpers shared by the simulator and the stability module.

/// Linear interpolation of `values` at time `t` on a sorted grid.
///
/// Clamps outside the grid. Used to read a series at interpolated event
/// instants.
pub fn interp_at(times: &[f64], values: &[f64], t: f64) -> f64 {
    debug_assert_eq!(times.len(), values.len());
    if times.is_empty() {
        return 0.0;
    }
    if t <= times[0] {
        return values[0];
    }
    if t >= times[times.len() - 1] {
        return values[values.len() - 1];
    }
    let k = match times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
        Ok(k) => return values[k],
        Err(k) => k - 1,
    };
    let frac = (t - times[k]) / (times[k + 1] - times[k]);
    values[k] + frac * (values[k + 1] - values[k])
}

/// Cumulative integral of a sampled integrand with a cubic 4-point rule.
///
/// Each panel `[t_k, t_{k+1}]` is integrated from the cubic through the four
/// nearest samples (one-sided at segment boundaries), which keeps the
/// accumulated error at fourth order on smooth segments. `split` marks a
/// discontinuity of the integrand: the stencil never reaches across it, so
/// panels on either side only see their own segment. Returns the cumulative
/// values, zero at index 0.
pub fn cumulative_integral(times: &[f64], u: &[f64], split: Option<usize>) -> Vec<f64> {
    let n = times.len();
    debug_assert_eq!(u.len(), n);
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    let segments: Vec<(usize, usize)> = match split {
        Some(s) if s > 0 && s < n - 1 => vec![(0, s), (s, n - 1)],
        _ => vec![(0, n - 1)],
    };
    for (lo, hi) in segments {
        for k in lo..hi {
            let inc = if hi - lo < 3 {
                // too few samples for a cubic; trapezoid
                0.5 * (u[k] + u[k + 1]) * (times[k + 1] - times[k])
            } else {
                // stencil of 4 samples within [lo, hi] containing [k, k+1]
                let s = k.saturating_sub(1).clamp(lo, hi - 3);
                panel_cubic(&times[s..s + 4], &u[s..s + 4], times[k], times[k + 1])
            };
            out[k + 1] = out[k] + inc;
        }
    }
    out
}

/// Integral over `[a, b]` of the Lagrange cubic through 4 nodes.
fn panel_cubic(ts: &[f64], us: &[f64], a: f64, b: f64) -> f64 {
    debug_assert_eq!(ts.len(), 4);
    let mut total = 0.0;
    for i in 0..4 {
        // integral of the i-th Lagrange basis polynomial over [a, b] via
        // 3-point Gauss-Legendre (exact for cubics)
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let g = (0.6f64).sqrt();
        let nodes = [mid - half * g, mid, mid + half * g];
        let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let mut basis_int = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            let mut l = 1.0;
            for j in 0..4 {
                if j != i {
                    l *= (x - ts[j]) / (ts[i] - ts[j]);
                }
            }
            basis_int += w * l;
        }
        total += us[i] * basis_int * half;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interp_hits_grid_points_and_midpoints() {
        let t = [0.0, 1.0, 2.0];
        let v = [0.0, 2.0, 6.0];
        assert_eq!(interp_at(&t, &v, 1.0), 2.0);
        assert_eq!(interp_at(&t, &v, 0.5), 1.0);
        assert_eq!(interp_at(&t, &v, 1.5), 4.0);
        assert_eq!(interp_at(&t, &v, -1.0), 0.0);
        assert_eq!(interp_at(&t, &v, 5.0), 6.0);
    }

    #[test]
    fn cubic_panels_are_exact_for_cubics() {
        let times: Vec<f64> = (0..11).map(|k| k as f64 * 0.1).collect();
        let u: Vec<f64> = times.iter().map(|t| 1.0 + t - 3.0 * t * t + t * t * t).collect();
        let exact = |t: f64| t + t * t / 2.0 - t * t * t + t.powi(4) / 4.0;
        let c = cumulative_integral(&times, &u, None);
        for (k, t) in times.iter().enumerate() {
            assert!((c[k] - exact(*t)).abs() < 1e-14, "at t={t}");
        }
    }

    #[test]
    fn split_keeps_stencils_inside_segments() {
        // integrand jumps at index 5; each side is a different cubic
        let times: Vec<f64> = (0..11).map(|k| k as f64 * 0.1).collect();
        let u: Vec<f64> = times
            .iter()
            .enumerate()
            .map(|(k, t)| if k < 5 { t * t } else { 10.0 - t * t })
            .collect();
        let c = cumulative_integral(&times, &u, Some(5));
        let left = |t: f64| t * t * t / 3.0;
        // value at the split uses the left cubic extended over the last left
        // panel with the jumped right endpoint; panels past the split are
        // clean, so differences within the right segment are exact
        let right = |t: f64| 10.0 * t - t * t * t / 3.0;
        for k in 6..11 {
            let expect = right(times[k]) - right(times[5]);
            assert!(
                ((c[k] - c[5]) - expect).abs() < 1e-13,
                "postsplit increment at k={k}"
            );
        }
        assert!((c[4] - left(times[4])).abs() < 1e-14);
    }

    #[test]
    fn sine_integral_converges_fourth_order() {
        let run = |n: usize| {
            let times: Vec<f64> = (0..=n).map(|k| k as f64 * (2.0 / n as f64)).collect();
            let u: Vec<f64> = times.iter().map(|t| (3.0 * t).sin()).collect();
            let c = cumulative_integral(&times, &u, None);
            let exact = (1.0 - (6.0f64).cos()) / 3.0;
            (c[n] - exact).abs()
        };
        let e1 = run(100);
        let e2 = run(200);
        assert!(e2 < e1 / 8.0, "e1={e1:.3e} e2={e2:.3e}");
    }
}
