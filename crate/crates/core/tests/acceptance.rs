//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! fails.
//!
//! `SOTNEURON_CRITERIA=1,5,7` runs a subset. `SOTNEURON_DESK_FULL=1` adds the
//! full desk-scale sweep to criterion 11 instead of only projecting it.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sotneuron::crossbar::*;
use sotneuron::device::*;
use sotneuron::magnet::*;
use sotneuron::montecarlo::*;
use sotneuron::{PhysicalConstants, Vec3};
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Outcome = Result<String, String>;

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn data(name: &str) -> String {
    format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
}

// 1
fn injection_efficiency() -> Outcome {
    let beta = Device::reference().beta;
    verdict((beta - 4.71).abs() <= 0.01, format!("beta = {beta:.4}, want 4.71 +/- 0.01"))
}

// 2
fn clock_power_check() -> Outcome {
    let dev = Device::reference();
    let p = clock_power(&PulseSchedule::default(), &dev.params.heavy_metal).map_err(|e| e.to_string())?;
    let r_ok = (dev.r_hm - 1000.0).abs() <= 10.0;
    let p_ok = (p.power - 7.22e-6).abs() <= 0.02 * 7.22e-6;
    verdict(
        r_ok && p_ok,
        format!(
            "R_HM = {:.3} ohm (1000 +/- 1%), P(85 uA) = {:.4} uW (7.22 +/- 2%)",
            dev.r_hm,
            p.power * 1e6
        ),
    )
}

fn bare_model(mat: MaterialParams, demag: DemagTensor, applied: Vec3) -> MacrospinModel {
    MacrospinModel::new(
        MagnetGeometry::default(),
        mat,
        demag,
        applied,
        PhysicalConstants::SI,
        IntegratorConfig::default(),
    )
    .unwrap()
}

// 3
fn physics_invariants() -> Outcome {
    // norm: reference device at 300 K under the clock torque, step by step
    let dev = Device::reference();
    let is = she_spin_current(85e-6, &dev.params.heavy_metal, &dev.params.free_layer);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut s = SpinState::new(Magnetization::from_angles(0.3, 1.0));
    let mut drift = 0.0f64;
    for _ in 0..1_000_000 {
        dev.model.integrate(&mut s, dev.model.config.dt, &is, &mut rng, None).unwrap();
        drift = drift.max((s.m.norm() - 1.0).abs());
    }
    let norm_ok = drift <= 1e-9;

    // energy: T = 0, no torque, damping only
    let geom = MagnetGeometry::default();
    let demag = demag_factors(&geom).unwrap();
    let quiet = MaterialParams {
        temperature: 0.0,
        ..*dev.material()
    };
    let model = bare_model(quiet, demag, Vec3::ZERO);
    let mut s = SpinState::new(Magnetization::from_angles(1.3, 0.4));
    let energy = |m: Vec3| magnetic_energy(m, &quiet, &geom, &demag, &PhysicalConstants::SI).joules;
    let (e0, mut prev, mut rises) = (energy(s.m), energy(s.m), 0u32);
    for _ in 0..50_000 {
        model.integrate(&mut s, model.config.dt, &SpinCurrent::NONE, &mut rng, None).unwrap();
        let e = energy(s.m);
        rises += (e > prev + 1e-12 * prev.abs()) as u32;
        prev = e;
    }
    let energy_ok = rises == 0 && prev < e0;

    // Larmor: H = 1e5 A/m along z, no anisotropy or shape field
    let alpha = dev.material().alpha;
    let free = MaterialParams {
        temperature: 0.0,
        ku2: 0.0,
        ..*dev.material()
    };
    let h = 1e5;
    let model = bare_model(free, DemagTensor::new(0.0, 0.0, 0.0), Vec3::new(0.0, 0.0, h));
    let mut s = SpinState::new(Magnetization::from_angles(0.6, 0.0));
    let dt = model.config.dt;
    let (mut crossings, mut first, mut last, mut prev_x) = (0u32, None, 0.0, s.m.x);
    for k in 1..=model.config.steps_for(5e-9) {
        model.integrate(&mut s, dt, &SpinCurrent::NONE, &mut rng, None).unwrap();
        let x = s.m.x;
        if prev_x < 0.0 && x >= 0.0 {
            let t = (k as f64 - x / (x - prev_x)) * dt;
            first.get_or_insert(t);
            last = t;
            crossings += 1;
        }
        prev_x = x;
    }
    let f = (crossings - 1) as f64 / (last - first.unwrap());
    let want = PhysicalConstants::SI.gamma() * h / (2.0 * std::f64::consts::PI * (1.0 + alpha * alpha));
    let larmor_err = (f - want).abs() / want;

    verdict(
        norm_ok && energy_ok && larmor_err <= 0.01,
        format!(
            "max | |m|-1 | = {drift:.1e} over 1e6 steps; energy rises = {rises}; Larmor {:.4} GHz vs {:.4} GHz ({:.2e} rel)",
            f / 1e9,
            want / 1e9,
            larmor_err
        ),
    )
}

// 4
fn calibration_round_trip() -> Outcome {
    let geom = MagnetGeometry::default();
    let demag = demag_factors(&geom).unwrap();
    let mut mat = MaterialParams::default();
    let c = PhysicalConstants::SI;
    mat.ku2 = calibrate_anisotropy(31.44, &mat, &geom, &demag, &c).map_err(|e| e.to_string())?;
    let kt = energy_barrier(&mat, &geom, &demag, &c) / c.kt(mat.temperature);
    let rel = (kt - 31.44).abs() / 31.44;
    verdict(rel <= 1e-6, format!("Ku2 = {:.6e} J/m3 gives {kt:.9} kT ({rel:.1e} rel)", mat.ku2))
}

/// Probability that E/kT = delta (1 - mz^2) falls in [lo, hi), mz uniform on
/// [-1, 1] with Boltzmann weight. Simpson's rule in |mz|.
fn boltzmann_bin(delta: f64, lo: f64, hi: f64) -> f64 {
    let w = |u: f64| (-delta * (1.0 - u * u)).exp();
    let simpson = |a: f64, b: f64| {
        let n = 2000;
        let h = (b - a) / n as f64;
        let mut s = w(a) + w(b);
        for k in 1..n {
            s += w(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    let u = |e: f64| (1.0 - e / delta).max(0.0).sqrt();
    simpson(u(hi), u(lo)) / simpson(0.0, 1.0)
}

// 5
fn boltzmann_equilibrium() -> Outcome {
    let barrier = 2.0;
    let params = DeviceParams {
        barrier_kt: barrier,
        ..Default::default()
    };
    let dev = Device::new(params, IntegratorConfig::default()).map_err(|e| e.to_string())?;
    let delta = dev.thermal_stability().unwrap();
    let (mat, c) = (dev.material(), PhysicalConstants::SI);
    let pole = magnetic_energy(Vec3::Z, mat, &dev.params.free_layer, &dev.demag, &c).joules;
    let kt_units = |m: Vec3| (magnetic_energy(m, mat, &dev.params.free_layer, &dev.demag, &c).joules - pole) / c.kt(mat.temperature);
    // energy decorrelates over ~100 ns at this barrier; samples 200 ns apart are independent for the chi2 test
    let (groups, span, chunk, thin, burn) = (4usize, 20e-6f64, 1e-9f64, 200usize, 200usize);
    let chunks = (span / chunk).round() as usize;
    let results: Vec<(u64, u64, Vec<f64>)> = (0..groups)
        .into_par_iter()
        .map(|g| {
            let mut rngs: [ChaCha8Rng; 4] = std::array::from_fn(|l| trial_rng(5, g as u32, l as u32));
            // half the lanes start in each well
            let mut states: [SpinState; 4] = std::array::from_fn(|l| {
                let z = if l % 2 == 0 { 1.0 } else { -1.0 };
                SpinState::new(Magnetization::new(Vec3::new(0.0, 0.0, z)).unwrap())
            });
            let none = [SpinCurrent::NONE; 4];
            let (mut up, mut down, mut energies) = (0u64, 0u64, vec![]);
            for c in 0..chunks {
                dev.model.integrate_lanes(&mut states, chunk, &none, &mut rngs).unwrap();
                for s in &states {
                    if s.m.z > 0.0 {
                        up += 1;
                    } else {
                        down += 1;
                    }
                    if c >= burn && c % thin == 0 {
                        energies.push(kt_units(s.m));
                    }
                }
            }
            (up, down, energies)
        })
        .collect();
    let up: u64 = results.iter().map(|r| r.0).sum();
    let down: u64 = results.iter().map(|r| r.1).sum();
    let energies: Vec<f64> = results.into_iter().flat_map(|r| r.2).collect();
    let ratio = up as f64 / down as f64;

    let bins = 10;
    let mut observed = vec![0u64; bins];
    for &e in &energies {
        observed[((e / delta * bins as f64).max(0.0) as usize).min(bins - 1)] += 1;
    }
    let n = energies.len() as f64;
    let chi2: f64 = (0..bins)
        .map(|k| {
            let lo = delta * k as f64 / bins as f64;
            let hi = delta * (k + 1) as f64 / bins as f64;
            let expect = n * boltzmann_bin(delta, lo, hi);
            (observed[k] as f64 - expect).powi(2) / expect
        })
        .sum();
    let p = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(chi2);
    let total = groups as f64 * 4.0 * span;
    verdict(
        (ratio - 1.0).abs() <= 0.1 && p > 0.01 && total >= 5e-6,
        format!(
            "{:.0} us simulated, up/down = {ratio:.4}, chi2 = {chi2:.2} on {} dof over {} samples, p = {p:.3}",
            total * 1e6,
            bins - 1,
            energies.len()
        ),
    )
}

// 6
fn hard_axis_capture() -> Outcome {
    let dev = Device::reference();
    let s = PulseSchedule::default().with_currents(85e-6, 0.0);
    let e = switching_probability(&dev, &s, 1000, 6).map_err(|e| e.to_string())?;
    verdict(
        e.p_captured >= 0.99,
        format!("P(|my| > 0.9 after 2 ns at 85 uA, 300 K) = {:.3} over {} trials", e.p_captured, e.n),
    )
}

// 7
fn few_ua_write() -> Outcome {
    let dev = Device::reference();
    let n = 10_000;
    let ua = [-10.0, -8.0, -6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0, 8.0, 10.0];
    let grid = SweepGrid {
        clock_levels: vec![85e-6],
        write_levels: ua.iter().map(|x| x * 1e-6).collect(),
        trials_per_point: n,
        master_seed: 7,
    };
    let d = phase_diagram(&grid, &dev, &PulseSchedule::default()).map_err(|e| e.to_string())?;
    let row: Vec<PointEstimate> = d.points[0]
        .iter()
        .map(|p| p.estimate().copied().ok_or_else(|| format!("point failed: {p:?}")))
        .collect::<Result<_, _>>()?;
    let zero = row[5].p_hat;
    let (best_i, best) = row
        .iter()
        .filter(|e| e.i_write != 0.0)
        .map(|e| (e.i_write, e.p_hat))
        .fold((0.0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    let curve: Vec<String> = row.iter().map(|e| format!("{:+.0}:{:.3}", e.i_write * 1e6, e.p_hat)).collect();
    verdict(
        best >= 0.99 && (zero - 0.5).abs() <= 0.02,
        format!(
            "best |I_write| <= 10 uA: p = {best:.4} at {:+.0} uA (need >= 0.99); p(0) = {zero:.4} (0.5 +/- 0.02); n = {n}; p_hat by uA [{}]",
            best_i * 1e6,
            curve.join(" ")
        ),
    )
}

fn sweep_bytes(grid: &SweepGrid, dev: &Device, threads: usize) -> (Vec<u8>, String) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let d = pool.install(|| phase_diagram(grid, dev, &PulseSchedule::default())).unwrap();
    let mut csv = vec![];
    d.write_csv(&mut csv).unwrap();
    (csv, d.to_json().unwrap())
}

// 8
fn determinism() -> Outcome {
    let dev = Device::reference();
    let grid = SweepGrid {
        clock_levels: vec![0.0, 40e-6, 85e-6],
        write_levels: vec![-5e-6, -1e-6, 1e-6, 5e-6],
        trials_per_point: 300,
        master_seed: 8,
    };
    let one = sweep_bytes(&grid, &dev, 1);
    let four = sweep_bytes(&grid, &dev, 4);
    verdict(
        one == four,
        format!(
            "3x4 grid x 300 trials, 1 vs 4 threads: CSV {} bytes, identical = {}",
            one.0.len(),
            one == four
        ),
    )
}

// 9
fn crossbar_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let p = CrossbarParams {
            r_switch: if k % 2 == 0 { 0.0 } else { rng.random_range(1.0..2e3) },
            gs: rng.random_range(1e-5..1e-3),
            ..Default::default()
        };
        let rows = rng.random_range(2..66);
        let (layer, x) = common::random_column(&mut rng, &p, rows);
        let closed = synaptic_current(&layer, 0, &x, &p);
        let oracle = common::nodal_current(&layer.g_plus, &layer.g_minus, &x, &p);
        let scale = p.gs * p.vs * p.g_max / (p.gs + p.g_max);
        worst = worst.max((closed - oracle).abs() / oracle.abs().max(scale));
    }
    verdict(worst <= 1e-12, format!("worst relative error {worst:.2e} over 1000 random columns"))
}

/// Write currents for the operating-point switching curve [uA].
const LOOKUP_UA: [f64; 23] = [
    -100.0, -50.0, -30.0, -20.0, -15.0, -10.0, -7.0, -5.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0,
    20.0, 30.0, 50.0, 100.0,
];

fn subset(ds: &Dataset, n: usize) -> Dataset {
    Dataset {
        images: ds.images[..n].to_vec(),
        labels: ds.labels[..n].to_vec(),
    }
}

// 10
fn end_to_end_accuracy() -> Outcome {
    let train = Dataset::load(data("train-images-idx3-ubyte.gz"), data("train-labels-idx1-ubyte.gz"), None)
        .map_err(|e| e.to_string())?;
    let eval = ingest_mnist(data("t10k-images-idx3-ubyte.gz"), data("t10k-labels-idx1-ubyte.gz"))
        .map_err(|e| e.to_string())?;
    let float = train_offline(&train, &TrainParams::default()).map_err(|e| e.to_string())?;
    let float_acc = float.accuracy(&eval);
    let net = quantize_weights(&float, &CrossbarParams::default()).map_err(|e| e.to_string())?;

    let dev = Device::reference();
    let schedule = PulseSchedule::default();
    let grid = SweepGrid {
        clock_levels: vec![schedule.i_clock],
        write_levels: LOOKUP_UA.iter().map(|x| x * 1e-6).collect(),
        trials_per_point: 1000,
        master_seed: 10,
    };
    let diagram = phase_diagram(&grid, &dev, &schedule).map_err(|e| e.to_string())?;
    let curve = ProbabilityCurve::from_diagram(&diagram, schedule.i_clock).map_err(|e| e.to_string())?;
    let lookup = Neurons::Lookup(&curve);
    let det = evaluate(&eval, &net, &Neurons::Deterministic, 1, 10).map_err(|e| e.to_string())?;
    let stoch = evaluate(&eval, &net, &lookup, 100, 10).map_err(|e| e.to_string())?;

    let five = subset(&eval, 5);
    let spot_lookup = evaluate(&five, &net, &lookup, 4000, 11).map_err(|e| e.to_string())?;
    let full = Neurons::Full {
        device: &dev,
        schedule,
    };
    let spot_full = evaluate(&five, &net, &full, 400, 12).map_err(|e| e.to_string())?;
    let gap = (spot_full.accuracy - spot_lookup.accuracy).abs();

    verdict(
        float_acc >= 0.9 && (0.70..=0.92).contains(&stoch.accuracy) && stoch.total_runs == 10_000 && gap <= 0.05,
        format!(
            "float {float_acc:.3} (>= 0.90); quantized deterministic {:.3}; lookup {:.4} over {} runs (0.70..0.92); \
             5-image full {:.3} vs lookup {:.3}, gap {:.3} (<= 0.05)",
            det.accuracy, stoch.accuracy, stoch.total_runs, spot_full.accuracy, spot_lookup.accuracy, gap
        ),
    )
}

// 11
fn desk_scale_throughput() -> Outcome {
    let dev = Device::reference();
    let mut grid = SweepGrid {
        clock_levels: SweepGrid::linspace(0.0, 120e-6, 20),
        write_levels: SweepGrid::linspace(-10e-6, 10e-6, 20),
        trials_per_point: 8,
        master_seed: 11,
    };
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get()).min(rayon::current_num_threads());
    let start = Instant::now();
    phase_diagram(&grid, &dev, &PulseSchedule::default()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let rate = (grid.point_count() as u64 * grid.trials_per_point) as f64 / secs;
    let per_core = rate / cores as f64;
    let desk = 20.0 * 20.0 * 1000.0;
    let projected = desk / (per_core * 4.0);
    let mut detail = format!(
        "{rate:.0} trajectories/s on {cores} core(s), {per_core:.0}/s per core; 20x20x1000 projected {:.1} min on 4 cores (<= 30)",
        projected / 60.0
    );
    let mut ok = projected <= 1800.0;
    if std::env::var_os("SOTNEURON_DESK_FULL").is_some() {
        grid.trials_per_point = 1000;
        let start = Instant::now();
        let d = phase_diagram(&grid, &dev, &PulseSchedule::default()).map_err(|e| e.to_string())?;
        let wall = start.elapsed().as_secs_f64();
        let rows = d.points.iter().flatten().filter(|p| p.estimate().is_some()).count();
        ok &= wall <= 1800.0 && rows == 400;
        detail += &format!("; full run {:.1} min on {cores} core(s), {rows} points", wall / 60.0);
    }
    verdict(ok, detail)
}

const CRITERIA: [(u32, &str, fn() -> Outcome); 11] = [
    (1, "injection efficiency", injection_efficiency),
    (2, "clock power", clock_power_check),
    (3, "physics invariants", physics_invariants),
    (4, "anisotropy calibration", calibration_round_trip),
    (5, "Boltzmann equilibrium", boltzmann_equilibrium),
    (6, "hard-axis capture", hard_axis_capture),
    (7, "few-uA write regime", few_ua_write),
    (8, "determinism", determinism),
    (9, "crossbar oracle", crossbar_oracle),
    (10, "end-to-end accuracy", end_to_end_accuracy),
    (11, "desk-scale throughput", desk_scale_throughput),
];

fn main() {
    let only: Option<Vec<u32>> = std::env::var("SOTNEURON_CRITERIA")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let mut failed = vec![];
    for (id, name, run) in CRITERIA {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!(
            "criterion {id:>2} {tag} {name}: {detail} [{:.1} s]",
            start.elapsed().as_secs_f64()
        );
        if result.is_err() {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: {} criterion(s) failed: {failed:?}", failed.len());
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
