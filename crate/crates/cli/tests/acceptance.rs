//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use ris_cli::config::ExperimentConfig;
use ris_cli::derived::{find_3db_point, find_crossing, sign_changes, slope_db_per_decade};
use ris_cli::presets::{preset, PRESET_NAMES};
use ris_cli::runner::{run, Overrides};
use ris_core::analysis::{
    expected_larp_1bit_los, expected_larp_general, expected_larp_uniform, larp,
    uniform_coherence_factor,
};
use ris_core::beamformer::{build_lookup_table, exhaustive_quantize};
use ris_core::codebook::{make_codebook, omega_for_decrement, Amplitudes};
use ris_core::montecarlo::{run_sweep, Scheme, SweepRow};
use ris_core::rng::trial_rng;
use ris_core::{AnalysisConstants, ObjectiveWeights, QuantizerMethod};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn sweep_of(name: &str, edit: impl FnOnce(&mut ExperimentConfig)) -> Vec<SweepRow> {
    let mut cfg = preset(name).expect("preset exists");
    edit(&mut cfg);
    let spec = cfg.to_spec(Path::new(".")).expect("valid preset");
    run_sweep(&spec).expect("sweep runs").rows
}

fn column<'a>(
    rows: &'a [SweepRow],
    channel: &str,
    codebook: &str,
    method: &str,
) -> Vec<&'a SweepRow> {
    rows.iter()
        .filter(|r| r.channel == channel && r.codebook == codebook && r.method == method)
        .collect()
}

fn c1_slopes() -> Check {
    let rows = sweep_of("fig4", |c| {
        c.trials = 500;
        c.sweep.values = Some(vec![64.0, 256.0, 1024.0, 4096.0]);
        c.channels.retain(|ch| ch.label != "rician");
    });
    let slope = |label: &str| {
        let v = column(&rows, label, "", "continuous");
        let m: Vec<f64> = v.iter().map(|r| r.sweep_value).collect();
        let p: Vec<f64> = v.iter().map(|r| r.mean_dbm).collect();
        slope_db_per_decade(&m, &p).unwrap_or(f64::NAN)
    };
    let (los, ray) = (slope("pure_los"), slope("rayleigh"));
    let msg = format!("pure LoS {los:.3} dB/dec, Rayleigh {ray:.3} dB/dec");
    if (los - 20.0).abs() <= 0.5 && (ray - 10.0).abs() <= 0.5 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c2_three_db_points() -> Check {
    let grid: Vec<f64> = (0..=1800).map(|i| i as f64 * 0.1).collect();
    let mut points = Vec::new();
    let mut absolute = Vec::new();
    let mut ok = true;
    for (k, target) in [(1u32, 90.0), (2, 140.0), (3, 175.0)] {
        let (c, eps): (Vec<f64>, Vec<f64>) = grid
            .iter()
            .map(|&c| (c, omega_for_decrement(k, c.to_radians())))
            .take_while(|&(_, w)| w > 0.0)
            .map(|(c, w)| (c, 10.0 * uniform_coherence_factor(k, w).log10()))
            .unzip();
        let p = find_3db_point(&c, &eps);
        ok &= p.is_some_and(|p| (p - target).abs() <= 5.0);
        points.push(p.map_or("none".into(), |p| format!("{p:.1}")));
        absolute.push(find_crossing(&c, &eps, -3.0).map_or("none".into(), |p| format!("{p:.1}")));
    }

    let rows = sweep_of("fig5", |c| c.scene.elements = 256);
    let worst = rows
        .iter()
        .filter(|r| r.method != "continuous")
        .map(|r| ((r.eps_db - r.eps_closedform_db).abs(), r))
        .max_by(|a, b| a.0.total_cmp(&b.0));
    let (gap, at) = worst.map_or((f64::NAN, String::new()), |(g, r)| {
        (g, format!("{} c={}", r.codebook, r.sweep_value))
    });
    ok &= gap <= 0.3;
    let msg = format!(
        "3 dB below c=0 at {} deg (absolute -3 dB crossing {}); MC worst |eps - closed form| {gap:.3} dB at {at}",
        points.join("/"),
        absolute.join("/")
    );
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c3_oracle_equivalence() -> Check {
    let cases = 10_000;
    let mut rng = trial_rng(3, 0);
    let mut mismatches = 0;
    let mut first = None;
    for case in 0..cases {
        let k = rng.random_range(1..=3u32);
        let omega = rng.random_range(30.0f64..=360.0).to_radians();
        let db: Vec<f64> = (0..1 << k).map(|_| rng.random_range(-10.0..=0.0)).collect();
        let cb = make_codebook(k, omega, Amplitudes::Db(db)).map_err(|e| e.to_string())?;
        let w = ObjectiveWeights::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0))
            .map_err(|e| e.to_string())?;
        let theta = rng.random_range(0.0..TAU);
        let table = build_lookup_table(&cb, &w);
        if table.lookup(theta) != exhaustive_quantize(&cb, theta, &w) {
            mismatches += 1;
            first.get_or_insert(case);
        }
    }
    let msg = format!("{} / {cases} cases agree", cases - mismatches);
    match first {
        None => Ok(msg),
        Some(c) => Err(format!("{msg}, first mismatch at case {c}")),
    }
}

fn c4_cross_formula() -> Check {
    let unit = AnalysisConstants::from_kappas(1.0, 0.0, 1.0);
    let m = 64;
    let mut worst_cor: f64 = 0.0;
    for a1 in [1.0, 0.8, 0.55, 0.3] {
        for a2 in [0.9, 0.6, 0.2] {
            for j in 0..9 {
                let w = 0.2 + j as f64 * (TAU - 0.3) / 8.0;
                let cb = make_codebook(1, w, Amplitudes::Linear(vec![a1, a2]))
                    .map_err(|e| e.to_string())?;
                let t = build_lookup_table(&cb, &ObjectiveWeights::pure_los());
                let g = expected_larp_general(&unit, m, &cb, &t).map_err(|e| e.to_string())?;
                worst_cor = worst_cor.max(rel(g, expected_larp_1bit_los(1.0, m, a1, a2, w)));
            }
        }
    }
    let mut worst_uni: f64 = 0.0;
    for k in 1..=5 {
        for j in 0..10 {
            let w = 0.3 + j as f64 * (TAU - 0.3) / 9.0;
            let cb = make_codebook(k, w, Amplitudes::uniform(k)).map_err(|e| e.to_string())?;
            let t = build_lookup_table(&cb, &ObjectiveWeights::pure_los());
            let g = expected_larp_general(&unit, m, &cb, &t).map_err(|e| e.to_string())?;
            worst_uni = worst_uni.max(rel(g, expected_larp_uniform(&unit, m, k, w)));
        }
    }
    let msg = format!("1-bit closed form vs general {worst_cor:.2e} (108 points), uniform vs general {worst_uni:.2e} (50 points)");
    if worst_cor <= 1e-9 && worst_uni <= 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c5_double_sum() -> Check {
    let mut rng = trial_rng(5, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let m = rng.random_range(1..=64usize);
        let c = AnalysisConstants::from_kappas(
            rng.random_range(0.0..5.0),
            rng.random_range(0.0..5.0),
            1.0,
        );
        let a: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..=1.0)).collect();
        let p: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..TAU)).collect();
        let mut literal = 0.0;
        for i in 0..m {
            literal += c.kappa_nlos * a[i] * a[i];
            for j in 0..m {
                literal += c.kappa_los * a[i] * a[j] * (p[i] - p[j]).cos();
            }
        }
        let collapsed = larp(&c, &a, &p).map_err(|e| e.to_string())?;
        worst = worst.max(rel(literal, collapsed));
    }
    let msg = format!("worst relative difference {worst:.2e} over 1000 instances");
    if worst <= 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c6_narrow_capability() -> Check {
    let closed = 10.0
        * (expected_larp_1bit_los(1.0, 1, 1.0, 1.0, 30f64.to_radians())
            / expected_larp_1bit_los(1.0, 1, 1.0, 1.0, PI))
        .log10();
    let rows = sweep_of("fig13-replay", |c| {
        c.trials = 200;
        c.scene = preset("fig5").unwrap().scene;
    });
    let mean = |label: &str| column(&rows, "pure_los", label, "group_query")[0].mean_mw;
    let sim = 10.0 * (mean("omega30") / mean("omega180")).log10();
    let msg = format!("closed form {closed:.3} dB, Monte Carlo (M=4096) {sim:.3} dB");
    if (closed + 11.7).abs() < 0.05 && (sim - closed).abs() <= 0.3 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c7_method_ordering() -> Check {
    let rows = sweep_of("fig6", |c| c.trials = 200);
    let mut closed_violations = 0;
    let mut mc_violations = 0;
    let mut gaps = Vec::new();
    for label in ["2bit", "3bit"] {
        let gq = column(&rows, "rician", label, "group_query");
        let np = column(&rows, "rician", label, "nearest_phase");
        closed_violations += gq
            .iter()
            .zip(&np)
            .filter(|(a, b)| a.closedform_mw < b.closedform_mw)
            .count();
        mc_violations += gq
            .iter()
            .zip(&np)
            .filter(|(a, b)| a.mean_mw < b.mean_mw)
            .count();
        let cont = column(&rows, "rician", "", "continuous");
        // Gap in mean LARP, normalised by the continuous optimum so points are comparable.
        let gap: Vec<(f64, f64, f64)> = gq
            .iter()
            .zip(&np)
            .zip(&cont)
            .filter(|((a, _), _)| a.sweep_value >= 120.0)
            .map(|((a, b), c)| {
                let lin = (a.closedform_mw - b.closedform_mw) / c.closedform_mw;
                (
                    a.sweep_value,
                    lin,
                    a.eps_closedform_db - b.eps_closedform_db,
                )
            })
            .collect();
        gaps.push(gap);
    }
    let ordered = gaps[0].iter().zip(&gaps[1]).all(|(g2, g3)| g3.1 >= g2.1);
    let db_ordered = gaps[0].iter().zip(&gaps[1]).all(|(g2, g3)| g3.2 >= g2.2);
    let shown: Vec<String> = gaps[0]
        .iter()
        .zip(&gaps[1])
        .map(|(g2, g3)| format!("c={}: {:.4}/{:.4}", g2.0, g2.1, g3.1))
        .collect();
    let msg = format!(
        "GQ<NP closed-form {closed_violations}, Monte Carlo {mc_violations}; gap/Γmax k=2 vs k=3 {}; in dB also ordered: {db_ordered}",
        shown.join(", ")
    );
    if closed_violations == 0 && mc_violations == 0 && ordered {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c8_amplitude_crossover() -> Check {
    let cfg = preset("fig7").unwrap();
    let spec = cfg.to_spec(Path::new(".")).map_err(|e| e.to_string())?;
    let mut spec = spec;
    spec.trials = 1;
    spec.schemes = vec![Scheme::Quantized(QuantizerMethod::GroupQuery)];
    let rows = run_sweep(&spec).map_err(|e| e.to_string())?.rows;
    let one = column(&rows, "rician", "codebook1", "group_query");
    let two = column(&rows, "rician", "codebook2", "group_query");
    let c: Vec<f64> = one.iter().map(|r| r.sweep_value).collect();
    let a: Vec<f64> = one.iter().map(|r| r.closedform_mw).collect();
    let b: Vec<f64> = two.iter().map(|r| r.closedform_mw).collect();
    let x = sign_changes(&c, &a, &b);
    let low_first = a.first() > b.first() && a.last() < b.last();
    let msg = format!(
        "{} crossing(s) at {x:.1?} deg; codebook1 ahead at c=0 and behind at c=260: {low_first}",
        x.len()
    );
    if x.len() == 1 && low_first {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c9_determinism() -> Check {
    let dirs = [
        tempfile::tempdir().map_err(|e| e.to_string())?,
        tempfile::tempdir().map_err(|e| e.to_string())?,
    ];
    let o = Overrides {
        trials: Some(8),
        elements: Some(256),
        seed: Some(11),
        ..Overrides::default()
    };
    let mut differing = Vec::new();
    for name in PRESET_NAMES {
        let mut bytes = Vec::new();
        for d in &dirs {
            run(name, d.path(), &o).map_err(|e| e.to_string())?;
            bytes.push(
                std::fs::read(d.path().join(format!("{name}.csv"))).map_err(|e| e.to_string())?,
            );
        }
        if bytes[0] != bytes[1] {
            differing.push(name);
        }
    }
    if differing.is_empty() {
        Ok(format!(
            "{} presets rerun bit-identically",
            PRESET_NAMES.len()
        ))
    } else {
        Err(format!("CSV differs for {differing:?}"))
    }
}

fn main() -> ExitCode {
    let checks: [Criterion; 9] = [
        ("1 element-count slopes", c1_slopes),
        (
            "2 3 dB points and Monte Carlo agreement",
            c2_three_db_points,
        ),
        (
            "3 lookup table equals exhaustive search",
            c3_oracle_equivalence,
        ),
        ("4 cross-formula consistency", c4_cross_formula),
        ("5 double-sum oracle", c5_double_sum),
        ("6 narrow-capability degradation", c6_narrow_capability),
        ("7 group query beats nearest phase", c7_method_ordering),
        ("8 amplitude crossover", c8_amplitude_crossover),
        ("9 determinism", c9_determinism),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let t = Instant::now();
        let result = check();
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(msg) => println!("PASS {name}: {msg} ({secs:.1}s)"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name}: {msg} ({secs:.1}s)");
            }
        }
    }
    println!("{} of {} criteria passed", 9 - failed, 9);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
