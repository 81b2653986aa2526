//! End-to-end acceptance suite. Runs without the libtest harness so every
//! criterion prints its own PASS/FAIL line.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use witten_index::clifford::{build_irreducible_rep, no_perturbation_witness};
use witten_index::geometry_examples::{
    de_rham_local_index, de_rham_operator, pin_sphere_indices, random_linearization,
};
use witten_index::instances::random_proper_instance;
use witten_index::local_index::{
    default_cutoff, fredholm_index_oracle, hermite_kernel_oracle, homotopy_invariance_check, local_index_eigenspace,
    GridConfig, LocalData, ModelOperator,
};
use witten_index::spectral_sim::{
    circle_counterexample, circle_morse_witten, cluster_report, geometric_range, torus_de_rham_index, MorseFunction,
    TorusField,
};
use witten_index::Error;

type Outcome = Result<String, String>;

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:.2?}, limit {limit:?}"))
    }
}

fn clifford_invariants() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 1..=8 {
        let rep = build_irreducible_rep(n).map_err(|e| e.to_string())?;
        let r = rep.invariants().max();
        if r > 1e-12 {
            return Err(format!("n = {n}: residual {r:.3e}"));
        }
        worst = worst.max(r);
    }
    let t = start.elapsed();
    within(t, Duration::from_secs(1))?;
    Ok(format!("n = 1..8, max residual {worst:.1e}, {t:.2?}"))
}

fn oracle_triangle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let count = 50;
    for i in 0..count {
        let n = 1 + i % 2;
        let p = random_proper_instance(n, &mut rng).map_err(|e| e.to_string())?;
        let data = LocalData::from_perturbation(&p);
        let e = data
            .normalized()
            .and_then(|d| local_index_eigenspace(&d))
            .map_err(|e| format!("instance {i}: {e}"))?;
        let h = hermite_kernel_oracle(&ModelOperator::from_data(&data), default_cutoff(n))
            .map_err(|e| format!("instance {i}: {e}"))?;
        let g = fredholm_index_oracle(&data, GridConfig::default_for(n)).map_err(|e| format!("instance {i}: {e}"))?;
        if e.index != h.index || e.index != g.index {
            return Err(format!(
                "instance {i} (n = {n}): eigenspace {}, hermite {}, grid {}",
                e.index, h.index, g.index
            ));
        }
    }
    let t = start.elapsed();
    within(t, Duration::from_secs(120))?;
    Ok(format!("{count} instances agree, {t:.2?}"))
}

fn de_rham_correspondence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let count = 20;
    let mut signs = [0usize; 2];
    for i in 0..count {
        let jac = random_linearization(2, 0.5, 2.0, &mut rng);
        let expect = jac.determinant().signum() as i64;
        let got = de_rham_local_index(&jac, None)
            .map_err(|e| format!("case {i}: {e}"))?
            .index;
        if got != expect {
            return Err(format!("case {i}: pipeline {got}, sign det {expect}"));
        }
        signs[usize::from(expect < 0)] += 1;
    }
    Ok(format!("{count} cases ({} positive, {} negative)", signs[0], signs[1]))
}

fn counterexample() -> Outcome {
    let mut worst = (0.0f64, 0.0f64);
    for s in [1.0, 10.0, 50.0] {
        let r = circle_counterexample(s, 256).map_err(|e| e.to_string())?;
        let dev = r.integer_deviation.ok_or("no integer deviation")?;
        let flat = r.flatness.ok_or("no flatness")?;
        if dev > 1e-6 || flat > 1e-6 {
            return Err(format!("s = {s}: deviation {dev:.2e}, flatness {flat:.2e}"));
        }
        worst = (worst.0.max(dev), worst.1.max(flat));
    }
    Ok(format!(
        "s ∈ {{1, 10, 50}}, N = 256: deviation {:.1e}, flatness {:.1e}",
        worst.0, worst.1
    ))
}

fn circle_morse() -> Outcome {
    let f = MorseFunction::cos_theta();
    let values = geometric_range(10.0, 1000.0, 5).map_err(|e| e.to_string())?;
    let mut sweep = values
        .iter()
        .map(|&s| circle_morse_witten(s, 256, &f))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    for r in &sweep {
        let g = r.graded_counts.ok_or("missing graded counts")?;
        if g.index() != 0 {
            return Err(format!("s = {}: index {}", r.s, g.index()));
        }
    }
    let model = sweep[0].model.clone();
    let fit = cluster_report(&mut sweep, &model).map_err(|e| e.to_string())?;
    if !fit.violations.is_empty() {
        return Err(format!("violations: {}", fit.violations.join("; ")));
    }
    Ok(format!("5 points in [10, 1000], C = {:.3}, index 0 throughout", fit.c))
}

fn torus_index() -> Outcome {
    let start = Instant::now();
    let v = TorusField::standard();
    let r = torus_de_rham_index(&v, 40.0, 24).map_err(|e| e.to_string())?;
    if r.spectral_index != 0 || r.spectral_index != r.combinatorial_index {
        return Err(format!(
            "spectral {}, combinatorial {}",
            r.spectral_index, r.combinatorial_index
        ));
    }
    let mut signs: Vec<i64> = r.zeros.iter().map(|z| z.sign).collect();
    signs.sort();
    if signs != [-1, -1, 1, 1] {
        return Err(format!("zero signs {signs:?}"));
    }
    let betti = torus_de_rham_index(&v, 0.0, 24)
        .map_err(|e| e.to_string())?
        .degree_kernels
        .ok_or("no degree kernels at s = 0")?;
    if betti != [1, 2, 1] {
        return Err(format!("s = 0 kernels {betti:?}"));
    }
    let t = start.elapsed();
    within(t, Duration::from_secs(300))?;
    Ok(format!("index 0 = +1−1−1+1, kernels at s = 0 {betti:?}, {t:.2?}"))
}

fn pin_sphere() -> Outcome {
    for m in 1..=3 {
        let r = pin_sphere_indices(m).map_err(|e| e.to_string())?;
        if r.total != 2 {
            return Err(format!("m = {m}: total {}", r.total));
        }
        for z in &r.per_zero {
            let expect = if z.axis % 2 == 1 { 1 } else { -1 };
            if z.index != expect {
                return Err(format!("m = {m}, axis {}: index {}", z.axis, z.index));
            }
        }
    }
    Ok("totals 2 for m = 1, 2, 3".into())
}

fn rotation(t: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()])
}

fn homotopy_invariance() -> Outcome {
    let grid = GridConfig::default_for(2);
    let samples = 5;
    let lerp = |a: &DMatrix<f64>, b: &DMatrix<f64>, i: usize| {
        let t = i as f64 / (samples - 1) as f64;
        a * (1.0 - t) + b * t
    };
    let flip = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let paths: Vec<(&str, Vec<DMatrix<f64>>)> = vec![
        ("rotation", (0..samples).map(|i| rotation(0.4 * i as f64)).collect()),
        (
            "scaling",
            (0..samples)
                .map(|i| DMatrix::from_diagonal_element(2, 2, 0.6 + 0.3 * i as f64))
                .collect(),
        ),
        (
            "shear",
            (0..samples)
                .map(|i| DMatrix::from_row_slice(2, 2, &[1.0, 0.4 * i as f64, 0.0, 1.0]))
                .collect(),
        ),
        (
            "reflected rotation",
            (0..samples).map(|i| rotation(0.5 * i as f64) * &flip).collect(),
        ),
        (
            "straight line",
            (0..samples)
                .map(|i| {
                    lerp(
                        &DMatrix::from_row_slice(2, 2, &[2.0, 0.3, -0.2, 1.0]),
                        &DMatrix::from_row_slice(2, 2, &[0.8, -0.5, 0.6, 1.5]),
                        i,
                    )
                })
                .collect(),
        ),
    ];
    let mut summary = Vec::new();
    for (name, mats) in &paths {
        let ops = mats
            .iter()
            .map(de_rham_operator)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("{name}: {e}"))?;
        let r = homotopy_invariance_check(&ops, grid).map_err(|e| format!("{name}: {e}"))?;
        if !r.constant {
            return Err(format!("{name}: indices {:?}", r.indices));
        }
        summary.push(format!("{name} {}", r.indices[0]));
    }
    let crossing: Vec<_> = (0..samples)
        .map(|i| lerp(&DMatrix::identity(2, 2), &flip, i))
        .map(|m| de_rham_operator(&m))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    match homotopy_invariance_check(&crossing, grid) {
        Err(e @ Error::AtSample { .. }) if e.is_precondition() => {}
        Err(e) => return Err(format!("degenerate path failed for the wrong reason: {e}")),
        Ok(r) => return Err(format!("degenerate path was indexed: {:?}", r.indices)),
    }
    Ok(format!("{}; degenerate path rejected", summary.join(", ")))
}

fn negative_existence() -> Outcome {
    for n in [2, 4, 6] {
        let rep = build_irreducible_rep(n).map_err(|e| e.to_string())?;
        let w = no_perturbation_witness(&rep).map_err(|e| e.to_string())?;
        if w.nullity_graded != 0 || w.nullity_ungraded != 1 || !w.ungraded_spanned_by_chirality {
            return Err(format!(
                "n = {n}: graded {}, ungraded {}, spanned by chirality {}",
                w.nullity_graded, w.nullity_ungraded, w.ungraded_spanned_by_chirality
            ));
        }
    }
    Ok("n = 2, 4, 6: graded 0, ungraded 1 spanned by chirality".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("clifford invariants", clifford_invariants),
        ("oracle triangle", oracle_triangle),
        ("de Rham correspondence", de_rham_correspondence),
        ("circle counterexample", counterexample),
        ("circle Morse localization", circle_morse),
        ("torus index", torus_index),
        ("pin sphere", pin_sphere),
        ("homotopy invariance", homotopy_invariance),
        ("negative existence", negative_existence),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
