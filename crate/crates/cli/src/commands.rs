use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc::{sync_channel, SyncSender};
use std::thread::JoinHandle;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use dbk_core::config::RunConfig;
use dbk_core::diagnostics::fitted_decay_rate;
use dbk_core::ledger::{write_row, LEDGER_HEADER};
use dbk_core::output::{save_snapshots, RunMetadata};
use dbk_core::solver::{existence_time_bound, run as integrate, NullObserver, Outcome, RunObserver};
use dbk_core::verify::{run_suite, SUITES};
use dbk_core::{Error, LedgerRow, Mobility, SimulationState};

const EXIT_BLOWUP: u8 = 2;

/// Streams ledger rows to disk and hands snapshots to a writer thread
/// through a bounded queue.
type SnapshotWriter = JoinHandle<dbk_core::Result<()>>;

struct Sinks {
    ledger: BufWriter<File>,
    cadence: usize,
    steps: usize,
    snapshots: Option<(SyncSender<(usize, SimulationState)>, SnapshotWriter)>,
    next_snapshot: usize,
}

impl Sinks {
    fn new(ledger: &Path, cadence: usize, dir: PathBuf) -> anyhow::Result<Self> {
        let mut w = BufWriter::new(File::create(ledger).with_context(|| format!("creating {}", ledger.display()))?);
        writeln!(w, "{LEDGER_HEADER}")?;
        let snapshots = (cadence > 0).then(|| {
            let (tx, rx) = sync_channel::<(usize, SimulationState)>(4);
            let handle = std::thread::spawn(move || {
                for (index, state) in rx {
                    save_snapshots(&dir, index, &state)?;
                }
                Ok(())
            });
            (tx, handle)
        });
        Ok(Self { ledger: w, cadence, steps: 0, snapshots, next_snapshot: 0 })
    }

    fn finish(mut self) -> anyhow::Result<()> {
        self.ledger.flush()?;
        if let Some((tx, handle)) = self.snapshots.take() {
            drop(tx);
            handle.join().map_err(|_| anyhow!("snapshot writer panicked"))??;
        }
        Ok(())
    }
}

impl RunObserver for Sinks {
    fn on_step(&mut self, state: &SimulationState, row: &LedgerRow) -> dbk_core::Result<()> {
        write_row(&mut self.ledger, row)?;
        if let Some((tx, _)) = &self.snapshots {
            if self.steps.is_multiple_of(self.cadence) || row.blowup {
                tx.send((self.next_snapshot, state.clone()))
                    .map_err(|_| Error::Io(std::io::Error::other("snapshot writer stopped")))?;
                self.next_snapshot += 1;
            }
        }
        self.steps += 1;
        Ok(())
    }
}

fn load(config: &Path) -> anyhow::Result<RunConfig> {
    match RunConfig::from_file(config) {
        Ok(c) => Ok(c),
        Err(Error::Config(errors)) => {
            let list: Vec<String> = errors.iter().map(|e| format!("  {e}")).collect();
            bail!("invalid config {}:\n{}", config.display(), list.join("\n"))
        }
        Err(e) => Err(e).with_context(|| format!("reading {}", config.display())),
    }
}

pub fn run(config: &Path, out: &Path) -> anyhow::Result<u8> {
    let cfg = load(config)?;
    let (problem, initial) = cfg.build()?;
    std::fs::create_dir_all(out)?;
    let bound = existence_time_bound(&initial.c, &problem.params);
    let mut sinks = Sinks::new(
        &out.join(&cfg.outputs.ledger),
        cfg.outputs.snapshot_cadence,
        out.join(&cfg.outputs.snapshot_dir),
    )?;
    let start = Instant::now();
    let result = integrate(&initial, &problem, &cfg.solver, &mut sinks);
    sinks.finish()?;
    let result = result?;
    let blowup_time = match result.outcome {
        Outcome::BlowUp { t } => Some(t),
        Outcome::Completed => None,
    };
    let meta = RunMetadata {
        outcome: result.outcome,
        blowup_time,
        final_time: result.final_state.t,
        wall_time_s: start.elapsed().as_secs_f64(),
        existence_time_bound: bound,
        steps_accepted: result.steps_accepted,
        steps_rejected: result.steps_rejected,
        rhs_evaluations: result.rhs_evaluations,
        domain: cfg.domain,
        params: cfg.params.clone(),
        solver: cfg.solver.clone(),
        forcing: format!("{:?}", cfg.forcing),
    };
    std::fs::write(out.join("metadata.json"), meta.to_json())?;
    match result.outcome {
        Outcome::Completed => {
            println!("completed at t = {} after {} steps", result.final_state.t, result.steps_accepted);
            Ok(0)
        }
        Outcome::BlowUp { t } => {
            println!("blow-up detected at t = {t}");
            Ok(EXIT_BLOWUP)
        }
    }
}

pub fn verify(suite: &str) -> anyhow::Result<u8> {
    if !SUITES.contains(&suite) {
        bail!("unknown suite `{suite}`; available: {}", SUITES.join(", "));
    }
    let rep = run_suite(suite)?;
    for c in &rep.checks {
        println!(
            "{} {}: measured {:.6e}, expected {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.expected
        );
    }
    let passed = rep.passed();
    println!("suite {suite}: {}", if passed { "passed" } else { "FAILED" });
    Ok(if passed { 0 } else { 1 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SweepParam {
    Kappa,
    D,
    DeltaHat,
    Gamma,
    MuE,
    /// Rate of the exponential mobility.
    R,
}

#[derive(Debug, Clone, PartialEq)]
struct VarySpec {
    param: SweepParam,
    name: String,
    values: Vec<f64>,
}

fn parse_vary(spec: &str) -> anyhow::Result<VarySpec> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [name, lo, hi, n] = parts[..] else {
        bail!("malformed --vary `{spec}`: expected param:lo:hi:n");
    };
    let param = match name {
        "kappa" => SweepParam::Kappa,
        "d" => SweepParam::D,
        "delta_hat" => SweepParam::DeltaHat,
        "gamma" => SweepParam::Gamma,
        "mu_e" => SweepParam::MuE,
        "R" => SweepParam::R,
        other => bail!("unknown sweep parameter `{other}` (kappa, d, delta_hat, gamma, mu_e, R)"),
    };
    let lo: f64 = lo.parse().with_context(|| format!("lower bound `{lo}`"))?;
    let hi: f64 = hi.parse().with_context(|| format!("upper bound `{hi}`"))?;
    let n: usize = n.parse().with_context(|| format!("count `{n}`"))?;
    if n == 0 || !lo.is_finite() || !hi.is_finite() {
        bail!("malformed --vary `{spec}`: need finite bounds and n >= 1");
    }
    let values = if n == 1 { vec![lo] } else { (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect() };
    Ok(VarySpec { param, name: name.to_string(), values })
}

fn apply(cfg: &mut RunConfig, param: SweepParam, v: f64) {
    let p = &mut cfg.params;
    match param {
        SweepParam::Kappa => p.kappa = v,
        SweepParam::D => p.d = v,
        SweepParam::DeltaHat => p.korteweg.delta_hat = v,
        SweepParam::Gamma => p.korteweg.gamma = v,
        SweepParam::MuE => p.mu_e = v,
        SweepParam::R => p.mobility = Mobility::Exponential(v),
    }
}

struct SweepRow {
    value: f64,
    outcome: String,
    blowup_time: Option<f64>,
    decay_rate: Option<f64>,
}

fn sweep_one(base: &RunConfig, vary: &VarySpec, value: f64) -> SweepRow {
    let mut cfg = base.clone();
    apply(&mut cfg, vary.param, value);
    let attempt = || -> dbk_core::Result<_> {
        let (problem, initial) = cfg.build()?;
        integrate(&initial, &problem, &cfg.solver, &mut NullObserver)
    };
    match attempt() {
        Ok(r) => {
            let (outcome, blowup_time) = match r.outcome {
                Outcome::Completed => ("Completed".to_string(), None),
                Outcome::BlowUp { t } => ("BlowUp".to_string(), Some(t)),
            };
            SweepRow { value, outcome, blowup_time, decay_rate: fitted_decay_rate(&r.ledger) }
        }
        Err(e) => SweepRow { value, outcome: format!("Error({})", e.to_string().replace(',', ";")), blowup_time: None, decay_rate: None },
    }
}

pub fn sweep(config: &Path, vary: &str, report: &Path) -> anyhow::Result<u8> {
    let spec = parse_vary(vary)?;
    let base = load(config)?;
    let rows: Vec<SweepRow> = std::thread::scope(|s| {
        let (base, spec) = (&base, &spec);
        let handles: Vec<_> = spec.values.iter().map(|&v| s.spawn(move || sweep_one(base, spec, v))).collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut w = BufWriter::new(File::create(report).with_context(|| format!("creating {}", report.display()))?);
    writeln!(w, "param,value,outcome,blowup_time,decay_rate")?;
    let opt = |v: Option<f64>| v.map_or_else(|| "NaN".to_string(), |x| format!("{x:.16e}"));
    for r in &rows {
        writeln!(w, "{},{:.16e},{},{},{}", spec.name, r.value, r.outcome, opt(r.blowup_time), opt(r.decay_rate))?;
    }
    w.flush()?;
    let failed = rows.iter().filter(|r| r.outcome.starts_with("Error")).count();
    println!("sweep over {}: {} runs, {failed} errors", spec.name, rows.len());
    Ok(if failed > 0 { 1 } else { 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vary_spec_parsing() {
        let v = parse_vary("kappa:0:1:3").unwrap();
        assert_eq!(v.param, SweepParam::Kappa);
        assert_eq!(v.values, vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_vary("R:-2:2:1").unwrap().values, vec![-2.0]);
        assert!(parse_vary("kappa:0:1").is_err());
        assert!(parse_vary("viscosity:0:1:2").is_err());
        assert!(parse_vary("d:0:x:2").is_err());
        assert!(parse_vary("d:0:1:0").is_err());
    }
}
