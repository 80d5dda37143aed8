//! One function per subcommand. Each validates its inputs fully before the
//! output directory is touched.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use serde_json::{json, Value};
use sotneuron::crossbar::{
    evaluate, ingest_mnist, network_infer, network_static_power, quantize_weights, train_offline, with_bias,
    AccuracyReport, ConductanceNetwork, Dataset, FloatNetwork, InferenceMode, Neurons, EVAL_IMAGES,
};
use sotneuron::device::{clock_power, simulate_two_step, Device, InitialState, PulseSchedule};
use sotneuron::magnet::{Magnetization, Trajectory};
use sotneuron::montecarlo::{phase_diagram_with_progress, trial_rng, PhaseDiagram, ProbabilityCurve, SweepGrid};
use sotneuron::vec3::Vec3;

use crate::config::{ExperimentConfig, Start};
use crate::error::CliError;

pub const TOOL: &str = "sotneuron";

/// Files produced by a command, written together at the end.
#[derive(Default)]
struct Output {
    files: Vec<(String, Vec<u8>)>,
}

impl Output {
    fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    fn json(&mut self, name: &str, value: &Value) {
        let mut s = serde_json::to_string_pretty(value).expect("json value");
        s.push('\n');
        self.add(name, s.into_bytes());
    }

    fn write(self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let mut paths = vec![];
        for (name, bytes) in self.files {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            paths.push(path);
        }
        Ok(paths)
    }
}

pub struct Run<'a> {
    pub cfg: &'a ExperimentConfig,
    pub command: &'static str,
}

impl Run<'_> {
    pub fn provenance(&self) -> Value {
        json!({
            "tool": TOOL,
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "seed": self.cfg.seed,
            "config": serde_json::to_value(self.cfg).expect("config serializes"),
        })
    }

    /// `# `-prefixed header for CSV files: tool line, then the config as TOML.
    fn csv_header(&self) -> String {
        let mut s = format!(
            "# {TOOL} {} {} seed={}\n",
            env!("CARGO_PKG_VERSION"),
            self.command,
            self.cfg.seed
        );
        for line in self.cfg.to_toml().lines() {
            let _ = writeln!(s, "# {line}");
        }
        s
    }

    fn out_dir(&self) -> &Path {
        &self.cfg.out
    }

    fn default_input(&self, given: &Option<PathBuf>, name: &str) -> PathBuf {
        given.clone().unwrap_or_else(|| self.out_dir().join(name))
    }
}

pub fn run(cfg: &ExperimentConfig, command: &'static str) -> Result<Vec<PathBuf>, CliError> {
    cfg.validate()?;
    let r = Run { cfg, command };
    let out = match command {
        "switch" => switch(&r)?,
        "phase-diagram" => phase(&r)?,
        "train" => train(&r)?,
        "quantize" => quantize(&r)?,
        "infer" => infer(&r)?,
        "evaluate" => eval(&r)?,
        "power" => power(&r)?,
        other => return Err(CliError::Failed(format!("unknown command {other}"))),
    };
    out.write(r.out_dir())
}

fn initial(start: Start) -> InitialState {
    let pole = |z: f64| InitialState::Fixed(Magnetization::new(Vec3::new(0.0, 0.0, z)).expect("unit pole"));
    match start {
        Start::Random => InitialState::RandomPole,
        Start::Up => pole(1.0),
        Start::Down => pole(-1.0),
    }
}

fn trajectory_csv(r: &Run, tr: &Trajectory) -> Vec<u8> {
    let mut s = r.csv_header();
    s.push_str("t_s,mx,my,mz\n");
    for p in &tr.samples {
        let _ = writeln!(s, "{},{},{},{}", p.t, p.m.x, p.m.y, p.m.z);
    }
    s.into_bytes()
}

fn switch(r: &Run) -> Result<Output, CliError> {
    let cfg = r.cfg;
    let device = cfg.device()?;
    let power = clock_power(&cfg.schedule, &cfg.device.heavy_metal)?;
    let mut out = Output::default();
    let mut runs = vec![];
    let mut ap = 0u32;
    for k in 0..cfg.switch.repeats {
        // trial k of point 0, the same stream a one-point sweep would use
        let mut rng = trial_rng(cfg.seed, 0, k);
        let o = simulate_two_step(
            &cfg.schedule,
            &device,
            initial(cfg.switch.initial),
            &mut rng,
            Some(cfg.switch.record_stride),
        )?;
        let file = format!("trajectory_{k}.csv");
        out.add(&file, trajectory_csv(r, o.trajectory.as_ref().expect("recorded")));
        ap += o.state.fired() as u32;
        runs.push(json!({
            "repeat": k,
            "trajectory": file,
            "initial_m": o.initial,
            "after_clock_m": o.after_clock,
            "final_m": o.final_m,
            "final_state": o.state,
            "fired": o.state.fired(),
            "hard_axis_captured": o.hard_axis_captured(),
        }));
    }
    let n = cfg.switch.repeats;
    let last = runs.last().map(|v| v["final_state"].clone()).unwrap_or(Value::Null);
    out.json(
        "summary.json",
        &json!({
            "provenance": r.provenance(),
            "final_state": last,
            "repeats": n,
            "antiparallel": ap,
            "parallel": n - ap,
            "clock": {
                "i_clock_a": cfg.schedule.i_clock,
                "r_hm_ohm": device.r_hm,
                "power_w": power.power,
                "energy_j": power.energy,
            },
            "runs": runs,
        }),
    );
    log::info!("switch: {ap}/{n} runs ended AP");
    Ok(out)
}

/// Runs a sweep with progress and throughput on stderr.
fn sweep(grid: &SweepGrid, device: &Device, template: &PulseSchedule, label: &str) -> Result<PhaseDiagram, CliError> {
    let start = Instant::now();
    let shown = AtomicU64::new(0);
    let progress = |done: u64, total: u64| {
        let pct = done * 100 / total.max(1);
        if pct >= shown.load(Ordering::Relaxed) + 5 || done == total {
            shown.store(pct, Ordering::Relaxed);
            let secs = start.elapsed().as_secs_f64();
            eprint!("\r{label}: {done}/{total} trajectories ({pct}%), {:.0}/s   ", done as f64 / secs.max(1e-9));
        }
    };
    let diagram = phase_diagram_with_progress(grid, device, template, &progress)?;
    let secs = start.elapsed().as_secs_f64();
    let total = grid.point_count() as u64 * grid.trials_per_point;
    eprintln!(
        "\r{label}: {total} trajectories in {secs:.1} s, {:.0} trajectories/s on {} threads",
        total as f64 / secs.max(1e-9),
        rayon::current_num_threads()
    );
    Ok(diagram)
}

fn failure_report(d: &PhaseDiagram) -> Option<String> {
    let failed: Vec<String> = d
        .failures()
        .map(|p| match p {
            sotneuron::montecarlo::PointOutcome::Failed { i_clock, i_write, error } => {
                format!("({i_clock:e} A, {i_write:e} A): {error}")
            }
            _ => unreachable!(),
        })
        .collect();
    (!failed.is_empty()).then(|| format!("{} point(s) failed: {}", failed.len(), failed.join("; ")))
}

fn phase(r: &Run) -> Result<Output, CliError> {
    let device = r.cfg.device()?;
    let grid = r.cfg.grid();
    let diagram = sweep(&grid, &device, &r.cfg.schedule, "phase-diagram")?;
    let mut out = Output::default();
    let mut csv = r.csv_header().into_bytes();
    diagram.write_csv(&mut csv)?;
    out.add("phase_diagram.csv", csv);
    out.json(
        "phase_diagram.json",
        &json!({"provenance": r.provenance(), "diagram": diagram}),
    );
    if let Some(msg) = failure_report(&diagram) {
        // keep what did finish, then report
        out.write(r.out_dir())?;
        return Err(CliError::Diverged(msg));
    }
    Ok(out)
}

fn train_set(r: &Run, limit: Option<usize>) -> Result<Dataset, CliError> {
    let d = &r.cfg.data;
    Ok(Dataset::load(&d.train_images, &d.train_labels, limit)?)
}

fn eval_set(r: &Run) -> Result<Dataset, CliError> {
    let d = &r.cfg.data;
    Ok(ingest_mnist(&d.test_images, &d.test_labels)?)
}

fn train(r: &Run) -> Result<Output, CliError> {
    let train = train_set(r, None)?;
    let eval = eval_set(r)?;
    eprintln!("train: {} training images, {} evaluation images", train.len(), eval.len());
    let mut net = train_offline(&train, &r.cfg.train)?;
    let (acc_train, acc_eval) = (net.accuracy(&train), net.accuracy(&eval));
    eprintln!("train: float accuracy {acc_train:.3} on training set, {acc_eval:.3} on evaluation set");
    let mut prov = r.provenance();
    prov["metrics"] = json!({"train_accuracy": acc_train, "eval_accuracy": acc_eval, "train_images": train.len()});
    net.provenance = Some(prov);
    let mut out = Output::default();
    out.add("weights.json", (net.to_json()? + "\n").into_bytes());
    Ok(out)
}

fn quantize(r: &Run) -> Result<Output, CliError> {
    let path = r.default_input(&r.cfg.network.weights, "weights.json");
    let float = FloatNetwork::load(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut net = quantize_weights(&float, &r.cfg.crossbar)?;
    let mut prov = r.provenance();
    prov["weights"] = json!(path);
    net.provenance = Some(prov);
    let mut out = Output::default();
    out.add("conductances.json", (net.to_json()? + "\n").into_bytes());
    Ok(out)
}

fn conductances(r: &Run) -> Result<ConductanceNetwork, CliError> {
    let path = r.default_input(&r.cfg.network.conductances, "conductances.json");
    ConductanceNetwork::load(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Switching curve at the operating clock, read from a saved diagram or
/// simulated. The diagram goes into the output either way.
fn lookup_curve(r: &Run, device: &Device, out: &mut Output) -> Result<ProbabilityCurve, CliError> {
    let lk = &r.cfg.network.lookup;
    let diagram = match &lk.diagram {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let mut v: Value = serde_json::from_str(&text)?;
            if let Some(inner) = v.get_mut("diagram") {
                v = inner.take();
            }
            serde_json::from_value::<PhaseDiagram>(v).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?
        }
        None => {
            let grid = SweepGrid {
                clock_levels: vec![r.cfg.schedule.i_clock],
                write_levels: lk.write.values(),
                trials_per_point: lk.trials_per_point,
                master_seed: r.cfg.seed,
            };
            sweep(&grid, device, &r.cfg.schedule, "lookup curve")?
        }
    };
    if let Some(msg) = failure_report(&diagram) {
        return Err(CliError::Diverged(msg));
    }
    let curve = ProbabilityCurve::from_diagram(&diagram, r.cfg.schedule.i_clock)?;
    out.json(
        "lookup_diagram.json",
        &json!({"provenance": r.provenance(), "diagram": diagram}),
    );
    Ok(curve)
}

fn mode_name(m: InferenceMode) -> &'static str {
    match m {
        InferenceMode::Deterministic => "deterministic",
        InferenceMode::StochasticLookup => "stochastic_lookup",
        InferenceMode::StochasticFull => "stochastic_full",
    }
}

fn infer(r: &Run) -> Result<Output, CliError> {
    let net = conductances(r)?;
    net.validate()?;
    let eval = eval_set(r)?;
    let k = r.cfg.network.image;
    if k >= eval.len() {
        return Err(CliError::Config(format!("network.image = {k}, evaluation set has {}", eval.len())));
    }
    let device = r.cfg.device()?;
    let mut out = Output::default();
    let mode = r.cfg.network.mode;
    let curve = match mode {
        InferenceMode::StochasticLookup => Some(lookup_curve(r, &device, &mut out)?),
        _ => None,
    };
    let neurons = match mode {
        InferenceMode::Deterministic => Neurons::Deterministic,
        InferenceMode::StochasticLookup => Neurons::Lookup(curve.as_ref().expect("built above")),
        InferenceMode::StochasticFull => Neurons::Full {
            device: &device,
            schedule: r.cfg.schedule,
        },
    };
    let mut rng = trial_rng(r.cfg.seed, k as u32, 0);
    let inf = network_infer(&eval.images[k], &net, &neurons, &mut rng)?;
    let label = eval.labels[k] as usize;
    out.json(
        "inference.json",
        &json!({
            "provenance": r.provenance(),
            "image": k,
            "label": label,
            "mode": mode,
            "class": inf.class,
            "correct": inf.class == label,
            "no_fire": inf.no_fire,
            "hidden": inf.hidden,
            "output": inf.output,
            "output_currents_a": inf.output_currents,
            "pixels": eval.images[k].to_vec(),
        }),
    );
    Ok(out)
}

fn eval(r: &Run) -> Result<Output, CliError> {
    let net = conductances(r)?;
    net.validate()?;
    let limit = r.cfg.network.images.unwrap_or(EVAL_IMAGES);
    let mut held_out = eval_set(r)?;
    held_out.images.truncate(limit);
    held_out.labels.truncate(limit);
    let overlap = train_set(r, Some(limit))?;
    let device = r.cfg.device()?;
    let mut out = Output::default();

    let mode = r.cfg.network.mode;
    let mut modes = vec![InferenceMode::Deterministic];
    if mode != InferenceMode::Deterministic {
        modes.push(mode);
    }
    let curve = match mode {
        InferenceMode::StochasticLookup => Some(lookup_curve(r, &device, &mut out)?),
        _ => None,
    };

    let runs = r.cfg.network.runs_per_image;
    let mut reports = vec![];
    let mut summary = serde_json::Map::new();
    for (protocol, ds) in [("held_out", &held_out), ("train_overlap", &overlap)] {
        for &m in &modes {
            let neurons = match m {
                InferenceMode::Deterministic => Neurons::Deterministic,
                InferenceMode::StochasticLookup => Neurons::Lookup(curve.as_ref().expect("built above")),
                InferenceMode::StochasticFull => Neurons::Full {
                    device: &device,
                    schedule: r.cfg.schedule,
                },
            };
            // deterministic runs are all alike, one per image is enough
            let n = if m == InferenceMode::Deterministic { 1 } else { runs };
            let start = Instant::now();
            let report: AccuracyReport = evaluate(ds, &net, &neurons, n, r.cfg.seed)?;
            eprintln!(
                "evaluate: {protocol} {}: accuracy {:.4} over {} runs ({:.1} s)",
                mode_name(m),
                report.accuracy,
                report.total_runs,
                start.elapsed().as_secs_f64()
            );
            let file = format!("runs_{protocol}_{}.csv", mode_name(m));
            let mut csv = r.csv_header().into_bytes();
            report.write_runs_csv(&mut csv)?;
            out.add(&file, csv);
            summary.insert(format!("{protocol}/{}", mode_name(m)), json!(report.accuracy));
            let mut v = serde_json::to_value(&report)?;
            v["protocol"] = json!(protocol);
            v["runs_csv"] = json!(file);
            reports.push(v);
        }
    }
    out.json(
        "evaluation.json",
        &json!({"provenance": r.provenance(), "accuracy": summary, "reports": reports}),
    );
    Ok(out)
}

pub const CLOCK_LABEL: &str = "reference figure: clock power per neuron, I_clock^2 R_HM (~7.22 uW at 85 uA)";
pub const RCN_LABEL: &str = "artifact estimate, not a reproduction of a published figure";

fn power(r: &Run) -> Result<Output, CliError> {
    let cfg = r.cfg;
    let hm = &cfg.device.heavy_metal;
    let p = clock_power(&cfg.schedule, hm)?;
    let rcn = match rcn_power(r) {
        Ok(v) => v,
        Err(e) if cfg.network.conductances.is_none() => {
            json!({"label": RCN_LABEL, "power_w": null, "skipped": e.to_string()})
        }
        Err(e) => return Err(e),
    };
    let mut out = Output::default();
    out.json(
        "power.json",
        &json!({
            "provenance": r.provenance(),
            "clock": {
                "label": CLOCK_LABEL,
                "i_clock_a": cfg.schedule.i_clock,
                "t_clock_s": cfg.schedule.t_clock,
                "r_hm_ohm": hm.resistance()?,
                "power_w": p.power,
                "energy_per_clock_j": p.energy,
            },
            "rcn_static": rcn,
        }),
    );
    Ok(out)
}

/// Static crossbar power for one evaluation image.
fn rcn_power(r: &Run) -> Result<Value, CliError> {
    let net = conductances(r)?;
    net.validate()?;
    let eval = eval_set(r)?;
    let k = r.cfg.network.image;
    let img = eval
        .images
        .get(k)
        .ok_or_else(|| CliError::Config(format!("network.image = {k}, evaluation set has {}", eval.len())))?;
    let w = network_static_power(&net, &with_bias(img.iter().copied()));
    let neurons = net.hidden.cols + net.output.cols;
    Ok(json!({
        "label": RCN_LABEL,
        "image": k,
        "power_w": w,
        "per_neuron_w": w / neurons as f64,
        "neurons": neurons,
    }))
}
