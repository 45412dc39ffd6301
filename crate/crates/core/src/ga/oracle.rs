//! Best objective attainable by any blade whose twist is linear in pressure.
//!
//! With `dphi_i = s dP_i` the objective is `sum w_i |dphi_req_i - s dP_i| / sum w_i`,
//! a weighted L1 line fit through the origin. Writing each term as
//! `w_i |dP_i| |r_i - s|` with `r_i = dphi_req_i / dP_i` shows the minimizer is
//! the weighted median of the `r_i` under weights `w_i |dP_i|`.

use crate::blade::PitchSchedule;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// Optimal twist per unit pressure (rad/Pa).
    pub slope: f64,
    /// Objective at that slope (rad).
    pub objective: f64,
}

/// Objective of a blade with twist slope `s` (rad/Pa), averaged over the
/// off-design entries.
pub fn objective_for_slope(schedule: &PitchSchedule, slope: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for e in schedule.off_design() {
        num += e.weight * (e.delta_phi_required - slope * e.delta_pressure).abs();
        den += e.weight;
    }
    num / den
}

/// Weighted median of `(value, weight)` pairs: the smallest value at which the
/// cumulative weight reaches half of the total.
pub fn weighted_median(points: &[(f64, f64)]) -> Result<f64> {
    let mut pts: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.1 > 0.0).collect();
    let total: f64 = pts.iter().map(|p| p.1).sum();
    if pts.is_empty() || !(total > 0.0) {
        return Err(Error::UndefinedSlope(
            "no off-design point with non-zero pressure change and weight".into(),
        ));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut acc = 0.0;
    for (v, w) in &pts {
        acc += w;
        if acc >= 0.5 * total {
            return Ok(*v);
        }
    }
    Ok(pts.last().unwrap().0)
}

pub fn oracle_optimum(schedule: &PitchSchedule) -> Result<OracleSolution> {
    let candidates: Vec<(f64, f64)> = schedule
        .off_design()
        .filter(|e| e.delta_pressure != 0.0)
        .map(|e| {
            (
                e.delta_phi_required / e.delta_pressure,
                e.weight * e.delta_pressure.abs(),
            )
        })
        .collect();
    let slope = weighted_median(&candidates)?;
    Ok(OracleSolution {
        slope,
        objective: objective_for_slope(schedule, slope),
    })
}

/// Best objective when the attainable slopes are limited to `[lo, hi]` (rad/Pa).
/// The objective is convex in the slope, so the constrained optimum is the
/// clamped free optimum.
pub fn oracle_within(schedule: &PitchSchedule, lo: f64, hi: f64) -> Result<OracleSolution> {
    let free = oracle_optimum(schedule)?;
    let slope = free.slope.clamp(lo.min(hi), hi.max(lo));
    Ok(OracleSolution {
        slope,
        objective: objective_for_slope(schedule, slope),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blade::ScheduleEntry;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn table(weights: [f64; 5]) -> PitchSchedule {
        let rows = [
            (180.0, -70.0, 0.7, 12.56, -3.44),
            (205.0, -45.0, 0.8, 14.3, -1.7),
            (250.0, 0.0, 0.9, 16.0, 0.0),
            (270.0, 20.0, 1.0, 17.66, 1.66),
            (300.0, 50.0, 1.1, 19.3, 3.3),
        ];
        let entries = rows
            .iter()
            .zip(weights)
            .map(|(r, w)| ScheduleEntry {
                weight: w,
                ..ScheduleEntry::from_table(r.0, r.1, r.2, r.3, r.4)
            })
            .collect();
        PitchSchedule::new(entries).unwrap()
    }

    /// Minimum over the candidate slopes by direct evaluation.
    fn brute_force(schedule: &PitchSchedule) -> (f64, f64) {
        schedule
            .off_design()
            .map(|e| e.delta_phi_required / e.delta_pressure)
            .map(|s| (s, objective_for_slope(schedule, s)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
    }

    const PER_KPA_DEG: f64 = 1e3 * 180.0 / std::f64::consts::PI;

    #[test]
    fn equal_weights() {
        let s = table([1.0; 5]);
        let o = oracle_optimum(&s).unwrap();
        assert_relative_eq!(o.slope * PER_KPA_DEG, 3.44 / 70.0, max_relative = 1e-12);
        assert_relative_eq!(o.objective.to_degrees(), 0.507_857_142_857, epsilon = 1e-9);
        assert!((o.objective - 8.86e-3).abs() < 5e-6);
        let (bs, bf) = brute_force(&s);
        assert_relative_eq!(bs, o.slope, max_relative = 1e-12);
        assert_relative_eq!(bf, o.objective, max_relative = 1e-12);
    }

    #[test]
    fn weighted_270_kpa() {
        let s = table([1.0, 1.0, 1.0, 4.0, 1.0]);
        let o = oracle_optimum(&s).unwrap();
        assert_relative_eq!(o.slope * PER_KPA_DEG, 0.066, max_relative = 1e-12);
        let achieved: Vec<f64> = s
            .entries()
            .iter()
            .map(|e| 16.0 + (o.slope * e.delta_pressure).to_degrees())
            .collect();
        for (a, want) in achieved.iter().zip([11.38, 13.03, 16.0, 17.32, 19.3]) {
            assert!((a - want).abs() < 1e-9, "{a} vs {want}");
        }
        assert_relative_eq!(o.objective.to_degrees(), 3.81 / 7.0, epsilon = 1e-12);
        let (_, bf) = brute_force(&s);
        assert_relative_eq!(bf, o.objective, max_relative = 1e-12);
    }

    #[test]
    fn single_point_is_hit_exactly() {
        let s = PitchSchedule::new(vec![
            ScheduleEntry::from_table(250.0, 0.0, 0.9, 16.0, 0.0),
            ScheduleEntry::from_table(300.0, 50.0, 1.1, 19.3, 3.3),
        ])
        .unwrap();
        assert!(oracle_optimum(&s).unwrap().objective.abs() < 1e-15);
    }

    #[test]
    fn undefined_slope() {
        assert!(matches!(weighted_median(&[]), Err(Error::UndefinedSlope(_))));
        assert!(matches!(weighted_median(&[(1.0, 0.0)]), Err(Error::UndefinedSlope(_))));
    }

    #[test]
    fn clamped_oracle() {
        let s = table([1.0; 5]);
        let zero = oracle_within(&s, 0.0, 0.0).unwrap();
        assert_relative_eq!(zero.objective.to_degrees(), 10.1 / 4.0, epsilon = 1e-12);
        let free = oracle_optimum(&s).unwrap();
        let wide = oracle_within(&s, -1.0, 1.0).unwrap();
        assert_eq!(free, wide);
    }

    proptest! {
        #[test]
        fn oracle_is_global_minimum(
            rows in prop::collection::vec((-100.0f64..100.0, -5.0f64..5.0, 0.0f64..5.0), 1..7),
            probe in -0.2f64..0.2,
        ) {
            let mut entries = vec![ScheduleEntry::from_table(250.0, 0.0, 1.0, 16.0, 0.0)];
            for (dp, dphi, w) in &rows {
                if dp.abs() < 1e-3 { continue; }
                let mut e = ScheduleEntry::from_table(250.0 + dp, *dp, 1.0, 16.0 + dphi, *dphi);
                e.weight = *w + 0.01;
                entries.push(e);
            }
            prop_assume!(entries.len() > 1);
            let s = PitchSchedule::new(entries).unwrap();
            let o = oracle_optimum(&s).unwrap();
            let probe_slope = probe.to_radians() / 1e3;
            prop_assert!(o.objective <= objective_for_slope(&s, probe_slope) + 1e-15);
            let (_, bf) = brute_force(&s);
            prop_assert!((bf - o.objective).abs() <= 1e-12 * bf.max(1e-12));
        }

        #[test]
        fn objective_ignores_row_order(seed in 0usize..120) {
            let s = table([1.0, 2.0, 1.0, 4.0, 0.5]);
            let mut rows = s.entries().to_vec();
            let n = rows.len();
            for i in 0..n { rows.swap(i, (seed / (i + 1)) % n); }
            let shuffled = PitchSchedule::new(rows).unwrap();
            let slope = 0.05_f64.to_radians() / 1e3;
            prop_assert!((objective_for_slope(&s, slope) - objective_for_slope(&shuffled, slope)).abs() < 1e-14);
        }
    }
}
