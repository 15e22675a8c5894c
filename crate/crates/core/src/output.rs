//! CSV and JSON emitters, `f0` dumps and figure data.
//!
//! Every CSV starts with `#` comment lines carrying `key=value` metadata,
//! always including `config_hash`; numbers use 17 significant digits.

use std::f64::consts::{PI, TAU};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::characteristics::Primitive;
use crate::characteristics::{phi_of, region_of, s1, s2, t_of, Region, Solver};
use crate::cochain::min_gap;
use crate::error::{Error, Result};
use crate::moebius::{flow_a, flow_n, wrap};
use crate::verify::CheckReport;

/// Full-precision scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `# key=value` lines.
pub fn write_meta(w: &mut impl Write, meta: &[(&str, String)]) -> Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

/// Creates `dir` and opens `dir/name` for writing.
pub fn create(dir: &Path, name: &str) -> Result<(PathBuf, std::io::BufWriter<fs::File>)> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let file = fs::File::create(&path)?;
    Ok((path, std::io::BufWriter::new(file)))
}

/// One `<check_id>.json` per report plus `summary.json`.
pub fn write_reports(dir: &Path, reports: &[CheckReport]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for r in reports {
        let path = dir.join(format!("{}.json", r.check_id));
        fs::write(&path, serde_json::to_string_pretty(r)? + "\n")?;
        paths.push(path);
    }
    let path = dir.join("summary.json");
    let summary = serde_json::json!({
        "passed": reports.iter().all(|r| r.passed),
        "checks": reports.iter().map(|r| serde_json::json!({"check_id": r.check_id, "passed": r.passed})).collect::<Vec<_>>(),
    });
    fs::write(&path, serde_json::to_string_pretty(&summary)? + "\n")?;
    paths.push(path);
    Ok(paths)
}

/// Distance of `(p1, p2)` from `{p_i = 0} ∪ {p1 = p2}` on the circle.
pub fn singular_distance(p1: f64, p2: f64) -> f64 {
    min_gap(&[0.0, p1, p2])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Flag {
    Ok,
    /// Inside the guard band; the value relies on extrapolated kernels.
    Guard,
    /// Outside the domain; the value is NaN.
    Domain,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::Ok => "ok",
            Flag::Guard => "guard",
            Flag::Domain => "domain",
        }
    }
}

/// A value of `f0` or `P` at one requested point.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveRow {
    pub point: Vec<f64>,
    pub value: f64,
    pub flag: Flag,
}

fn flagged(result: Result<f64>, gap: f64, guard: f64) -> (f64, Flag) {
    match result {
        Ok(v) if gap < guard => (v, Flag::Guard),
        Ok(v) => (v, Flag::Ok),
        Err(_) => (f64::NAN, Flag::Domain),
    }
}

/// `f0` at Ω-points; points are flagged rather than dropped.
pub fn solve_f0(solver: &Solver, points: &[(f64, f64)], guard: f64) -> Vec<SolveRow> {
    points
        .par_iter()
        .map(|&(p1, p2)| {
            let (value, flag) = flagged(solver.f0_uncached(p1, p2), singular_distance(p1, p2), guard);
            SolveRow {
                point: vec![p1, p2],
                value,
                flag,
            }
        })
        .collect()
}

/// `P_c(f)` at 4-tuples.
pub fn solve_primitive(prim: &Primitive, tuples: &[Vec<f64>], guard: f64) -> Vec<SolveRow> {
    tuples
        .par_iter()
        .map(|x| {
            let (value, flag) = flagged(prim.try_eval(x), min_gap(x), guard);
            SolveRow {
                point: x.clone(),
                value,
                flag,
            }
        })
        .collect()
}

/// Reads points: one per line, comma or whitespace separated, `#` comments.
/// Lines with 2 numbers are Ω-points, lines with 4 numbers are 4-tuples.
pub fn read_points(text: &str) -> Result<(Vec<(f64, f64)>, Vec<Vec<f64>>)> {
    let (mut pairs, mut tuples) = (Vec::new(), Vec::new());
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: std::result::Result<Vec<f64>, _> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect();
        let vals = vals.map_err(|e| Error::InvalidArgument(format!("line {}: {e}", n + 1)))?;
        match vals.len() {
            2 => pairs.push((vals[0], vals[1])),
            4 => tuples.push(vals),
            k => return Err(Error::InvalidArgument(format!("line {}: expected 2 or 4 numbers, got {k}", n + 1))),
        }
    }
    Ok((pairs, tuples))
}

pub fn write_solve_rows(w: &mut impl Write, rows: &[SolveRow], meta: &[(&str, String)]) -> Result<()> {
    write_meta(w, meta)?;
    writeln!(w, "kind,x0,x1,x2,x3,value,flag")?;
    for r in rows {
        let kind = if r.point.len() == 2 { "f0" } else { "P" };
        let mut cols: Vec<String> = r.point.iter().map(|&x| num(x)).collect();
        cols.resize(4, String::new());
        writeln!(w, "{kind},{},{},{}", cols.join(","), num(r.value), r.flag.as_str())?;
    }
    Ok(())
}

/// Cell centres of an `n x n` grid on `(0, 2pi)^2`, restricted to a region if given.
pub fn grid_points(n: usize, region: Option<Region>) -> Vec<(f64, f64)> {
    let h = TAU / n as f64;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let p = (h * (i as f64 + 0.5), h * (j as f64 + 0.5));
            match (region, region_of(p.0, p.1)) {
                (_, Err(_)) => {}
                (None, Ok(_)) => out.push(p),
                (Some(r), Ok(q)) if r == q => out.push(p),
                _ => {}
            }
        }
    }
    out
}

/// `(phi1, phi2, f0, component)` rows.
pub fn write_f0_grid(w: &mut impl Write, rows: &[SolveRow], meta: &[(&str, String)]) -> Result<()> {
    write_meta(w, meta)?;
    writeln!(w, "phi1,phi2,f0,component,flag")?;
    for r in rows {
        let comp = match region_of(r.point[0], r.point[1]) {
            Ok(Region::Plus) => "plus",
            Ok(Region::Minus) => "minus",
            Err(_) => "none",
        };
        writeln!(
            w,
            "{},{},{},{comp},{}",
            num(r.point[0]),
            num(r.point[1]),
            num(r.value),
            r.flag.as_str()
        )?;
    }
    Ok(())
}

/// Max of `|f0(p) + f0(-p2, -p1)|` over a grid dump, paired through the reflection
/// about the antidiagonal, relative to the max of `|f0|`.
pub fn antidiagonal_antisymmetry(rows: &[SolveRow], n: usize) -> f64 {
    let h = TAU / n as f64;
    let index = |x: f64| ((x / h) - 0.5).round() as i64;
    let mut map = std::collections::HashMap::new();
    for r in rows {
        map.insert((index(r.point[0]), index(r.point[1])), r.value);
    }
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for r in rows {
        let (i, j) = (index(r.point[0]), index(r.point[1]));
        let mirror = (n as i64 - 1 - j, n as i64 - 1 - i);
        if let Some(&m) = map.get(&mirror) {
            worst = worst.max((r.value + m).abs());
            scale = scale.max(r.value.abs());
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        worst / scale
    }
}

/// `ln|tan(p1/2)| - ln|tan(p2/2)|`, constant along A-orbits.
pub fn a_invariant(p1: f64, p2: f64) -> f64 {
    (p1 / 2.0).tan().abs().ln() - (p2 / 2.0).tan().abs().ln()
}

/// `cot(p1/2) - cot(p2/2)`, constant along N-orbits.
pub fn n_invariant(p1: f64, p2: f64) -> f64 {
    1.0 / (p1 / 2.0).tan() - 1.0 / (p2 / 2.0).tan()
}

/// A sampled curve in the `(phi1, phi2)` plane.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn orbit(label: String, start: (f64, f64), flow: fn(f64, f64) -> f64, span: f64, samples: usize) -> Curve {
    let points = (0..samples)
        .map(|k| {
            let u = -span + 2.0 * span * k as f64 / (samples - 1) as f64;
            (wrap(flow(u, start.0)), wrap(flow(u, start.1)))
        })
        .filter(|&(a, b)| a != 0.0 && b != 0.0)
        .collect();
    Curve { label, points }
}

/// A-orbits and N-orbits through points of the antidiagonal.
pub fn orbit_curves(count: usize, samples: usize) -> (Vec<Curve>, Vec<Curve>) {
    let mut a = Vec::new();
    let mut n = Vec::new();
    for k in 0..count {
        let phi = TAU * (k as f64 + 0.5) / count as f64;
        if (phi - PI).abs() < 1e-9 {
            continue;
        }
        // A-orbits through an off-antidiagonal point; the antidiagonal itself is an A-orbit
        let start = (phi, wrap(TAU - phi + 0.5));
        if region_of(start.0, start.1).is_ok() {
            a.push(orbit(format!("A{k}"), start, flow_a, 8.0, samples));
        }
        n.push(orbit(format!("N{k}"), (phi, TAU - phi), flow_n, 20.0, samples));
    }
    (a, n)
}

/// Worst deviation of the conserved quantity along each curve.
pub fn invariant_defect(curves: &[Curve], invariant: fn(f64, f64) -> f64) -> f64 {
    let mut worst: f64 = 0.0;
    for c in curves {
        let Some(&first) = c.points.first() else { continue };
        let i0 = invariant(first.0, first.1);
        for &(a, b) in &c.points {
            worst = worst.max((invariant(a, b) - i0).abs());
        }
    }
    worst
}

/// From `omega_+-` along the antidiagonal (an A-orbit) to `(Phi, 2pi - Phi)`,
/// then along the N-orbit for time `T` to the target.
pub fn characteristic_path(p1: f64, p2: f64, samples: usize) -> Result<Curve> {
    let region = region_of(p1, p2)?;
    let phi = phi_of(p1, p2)?;
    let t = t_of(p1, p2);
    let base = region.base();
    let s = crate::characteristics::s_of(phi, region)?;
    let mut points = Vec::with_capacity(2 * samples);
    for k in 0..samples {
        let u = s * k as f64 / (samples - 1) as f64;
        points.push((flow_a(u, base.0), flow_a(u, base.1)));
    }
    let foot = (phi, TAU - phi);
    for k in 1..samples {
        let u = t * k as f64 / (samples - 1) as f64;
        points.push((flow_n(u, foot.0), flow_n(u, foot.1)));
    }
    // land exactly on the requested target
    if let Some(last) = points.last_mut() {
        *last = (wrap(p1), wrap(p2));
    }
    Ok(Curve {
        label: format!("path_{}", if region == Region::Plus { "plus" } else { "minus" }),
        points,
    })
}

/// The six elements of `S_3` acting on Ω.
pub fn s3_orbit(p: (f64, f64)) -> [(f64, f64); 6] {
    [p, s1(p), s2(p), s1(s2(p)), s2(s1(p)), s1(s2(s1(p)))]
}

/// The fundamental domain `{0 < p1 < p2, p2 <= 2 p1, p2 <= pi + p1 / 2}`: the third of
/// Ω+ cut out by two medians, adjacent to the diagonal.
pub fn in_fundamental_domain(p: (f64, f64)) -> bool {
    let (a, b) = p;
    0.0 < a && a < b && b < TAU && b <= 2.0 * a + 1e-12 && b <= PI + 0.5 * a + 1e-12
}

pub fn fundamental_domain_boundary() -> Curve {
    let c = (TAU / 3.0, 2.0 * TAU / 3.0);
    Curve {
        label: "domain".into(),
        points: vec![(0.0, 0.0), c, (TAU, TAU), (0.0, 0.0)],
    }
}

/// Images of `xi -> (2pi/3, xi)` and `xi -> (4pi/3, xi)` inside the fundamental domain.
pub fn segment_images(samples: usize) -> Vec<Curve> {
    let mut out = Vec::new();
    for (name, base) in [("seg_2pi3", TAU / 3.0), ("seg_4pi3", 2.0 * TAU / 3.0)] {
        for g in 0..6 {
            let mut points = Vec::new();
            for k in 0..samples {
                let xi = TAU * (k as f64 + 0.5) / samples as f64;
                if (xi - base).abs() < 1e-12 {
                    continue;
                }
                let q = s3_orbit((base, xi))[g];
                if in_fundamental_domain(q) {
                    points.push(q);
                }
            }
            if !points.is_empty() {
                out.push(Curve {
                    label: format!("{name}_g{g}"),
                    points,
                });
            }
        }
    }
    out
}

pub fn write_curves(w: &mut impl Write, curves: &[Curve], meta: &[(&str, String)]) -> Result<()> {
    write_meta(w, meta)?;
    writeln!(w, "curve,index,phi1,phi2")?;
    for c in curves {
        for (k, &(a, b)) in c.points.iter().enumerate() {
            writeln!(w, "{},{k},{},{}", c.label, num(a), num(b))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_17_significant_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(num(-2.5), "-2.5000000000000000e0");
    }

    #[test]
    fn orbits_conserve_their_invariants() {
        let (a, n) = orbit_curves(12, 200);
        assert!(!a.is_empty() && !n.is_empty());
        assert!(invariant_defect(&a, a_invariant) < 1e-8);
        assert!(invariant_defect(&n, n_invariant) < 1e-8);
    }

    #[test]
    fn path_starts_at_base_point_and_ends_at_target() {
        for &(p1, p2) in &[(0.7, 4.0), (5.0, 1.2), (2.0, 2.5)] {
            let c = characteristic_path(p1, p2, 50).unwrap();
            let base = region_of(p1, p2).unwrap().base();
            let first = c.points[0];
            assert!((first.0 - base.0).abs() < 1e-12 && (first.1 - base.1).abs() < 1e-12);
            let before = c.points[c.points.len() - 2];
            assert!((before.0 - p1).abs() < 0.5 && (before.1 - p2).abs() < 0.5);
            // the N-leg is one N-orbit
            let leg = &c.points[50..];
            let i0 = n_invariant(leg[0].0, leg[0].1);
            for &(a, b) in leg {
                assert!((n_invariant(a, b) - i0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn domain_is_a_fundamental_domain() {
        let s = crate::sampling::Sampler::new(0, "fd");
        for k in 0..500 {
            let x = s.admissible(k, 3, 1e-3);
            let p = (wrap(x[1] - x[0]), wrap(x[2] - x[0]));
            let hits = s3_orbit(p).iter().filter(|&&q| in_fundamental_domain(q)).count();
            assert_eq!(hits, 1, "{p:?}");
        }
    }

    #[test]
    fn segment_images_stay_away_from_the_corners() {
        let imgs = segment_images(2000);
        assert!(!imgs.is_empty());
        let mut edge = f64::INFINITY;
        for c in &imgs {
            for &(a, b) in &c.points {
                assert!(in_fundamental_domain((a, b)));
                edge = edge.min(a.min(TAU - a).min(b).min(TAU - b));
            }
        }
        assert!(edge > 1.0, "{edge}");
    }

    #[test]
    fn points_file_parses_both_kinds() {
        let (p, t) = read_points("# comment\n1.0, 2.0\n0 1 2 3\n\n").unwrap();
        assert_eq!(p, vec![(1.0, 2.0)]);
        assert_eq!(t, vec![vec![0.0, 1.0, 2.0, 3.0]]);
        assert!(read_points("1 2 3").is_err());
        assert!(read_points("a b").is_err());
    }

    #[test]
    fn grid_splits_by_region() {
        let all = grid_points(20, None);
        let plus = grid_points(20, Some(Region::Plus));
        let minus = grid_points(20, Some(Region::Minus));
        assert_eq!(all.len(), plus.len() + minus.len());
        assert_eq!(plus.len(), minus.len());
    }
}
