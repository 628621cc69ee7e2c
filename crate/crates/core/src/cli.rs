//! Command-line front end. [`run`] takes explicit I/O handles so the
//! commands can be driven from tests.
//!
//! Exit codes: 0 success, 1 invalid input object, 2 parse error,
//! 3 classification negative, 4 numerical-quality failure.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::json;

use crate::channels::{apply, classify_incoherent};
use crate::coherence::{coherence, is_incoherent, CoherenceReport, INCOHERENT_TOL};
use crate::error::Error;
use crate::fock::{
    default_cutoff, diagonality_residual, fock_matrix, oracle_coherence, oracle_mean_photon,
    COHERENCE_MAX_DEFICIT,
};
use crate::gaussian::{validate_state_with_tol, GaussianState, DEFAULT_TOL};
use crate::io::{csv_header, format_float, ChannelInput, StateSpecDocument, TrajectoryRow};
use crate::states::StateSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NEGATIVE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Environment variable overriding the default physicality tolerance.
pub const TOL_ENV: &str = "GAUSS_COHERENCE_TOL";

/// Slack allowed on the coherence trajectory under incoherent channels.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// `oracle-compare` passes when `|Δn̄| ≤ max(1e-6, 10·(cutoff+1)·deficit)`,
/// `|ΔC| ≤ 1e-3`, and the trace deficit is at most 1e-4.
pub const ORACLE_NBAR_TOL: f64 = 1e-6;
pub const ORACLE_COHERENCE_TOL: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(
    name = "gaussian-coherence",
    version,
    about = "Relative-entropy coherence of Gaussian states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that a state document describes a physical Gaussian state.
    Validate {
        /// State JSON file, or "-" for stdin.
        state: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Coherence, entropy, mean photon numbers and closest incoherent state.
    Coherence {
        state: PathBuf,
        #[arg(long, conflicts_with = "text")]
        json: bool,
        #[arg(long)]
        text: bool,
    },
    /// Apply a channel (or list of channels) repeatedly and tabulate.
    Evolve {
        state: PathBuf,
        /// Channel JSON file: one channel document or a list applied in order.
        channel: PathBuf,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Decide whether a channel maps thermal products to thermal products.
    CheckIncoherent {
        channel: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Compare closed forms with the truncated number-basis oracle (one mode).
    OracleCompare {
        state: PathBuf,
        #[arg(long)]
        cutoff: Option<usize>,
    },
    /// Run the seeded invariant sweep.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    tol: f64,
}

/// Failure of one command, carrying its exit code.
struct Exit(i32);

type CmdResult = std::result::Result<i32, Exit>;

impl Io<'_> {
    fn fail(&mut self, code: i32, msg: impl std::fmt::Display) -> Exit {
        let _ = writeln!(self.err, "error: {msg}");
        Exit(code)
    }

    fn read_source(&mut self, path: &PathBuf) -> std::result::Result<String, Exit> {
        if path.as_os_str() == "-" {
            let mut buf = String::new();
            self.stdin
                .read_to_string(&mut buf)
                .map_err(|e| self.fail(EXIT_PARSE, format!("reading stdin: {e}")))?;
            Ok(buf)
        } else {
            fs::read_to_string(path)
                .map_err(|e| self.fail(EXIT_PARSE, format!("reading {}: {e}", path.display())))
        }
    }

    fn parse<T: DeserializeOwned>(&mut self, path: &PathBuf) -> std::result::Result<T, Exit> {
        let text = self.read_source(path)?;
        serde_json::from_str(&text).map_err(|e| {
            self.fail(
                EXIT_PARSE,
                format!(
                    "{}: line {}, column {}: {e}",
                    path.display(),
                    e.line(),
                    e.column()
                ),
            )
        })
    }

    fn state(&mut self, path: &PathBuf) -> std::result::Result<GaussianState, Exit> {
        let doc: StateSpecDocument = self.parse(path)?;
        let tol = self.tol;
        doc.build_with_tol(tol).map_err(|e| self.fail(EXIT_INVALID, e))
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    let tol = match std::env::var(TOL_ENV) {
        Ok(raw) => match raw.trim().parse::<f64>() {
            Ok(t) if t.is_finite() && t >= 0.0 => t,
            _ => {
                let _ = writeln!(err, "error: {TOL_ENV}={raw:?} is not a non-negative number");
                return EXIT_PARSE;
            }
        },
        Err(_) => DEFAULT_TOL,
    };
    let mut io = Io { stdin, out, err, tol };
    let result = match cli.command {
        Command::Validate { state, json } => cmd_validate(&mut io, &state, json),
        Command::Coherence { state, json, .. } => cmd_coherence(&mut io, &state, json),
        Command::Evolve { state, channel, steps, csv } => {
            cmd_evolve(&mut io, &state, &channel, steps, csv.as_ref())
        }
        Command::CheckIncoherent { channel, json } => cmd_check_incoherent(&mut io, &channel, json),
        Command::OracleCompare { state, cutoff } => cmd_oracle_compare(&mut io, &state, cutoff),
        Command::Selftest { seed, trials } => cmd_selftest(&mut io, seed, trials),
    };
    match result {
        Ok(code) | Err(Exit(code)) => code,
    }
}

fn io_err(io: &mut Io<'_>, e: std::io::Error) -> Exit {
    io.fail(EXIT_INVALID, format!("write failed: {e}"))
}

fn cmd_validate(io: &mut Io<'_>, path: &PathBuf, json: bool) -> CmdResult {
    let doc: StateSpecDocument = io.parse(path)?;
    let spec = doc.to_spec().map_err(|e| io.fail(EXIT_INVALID, e))?;
    let report = match &spec {
        StateSpec::Explicit { modes, cov, disp } => {
            validate_state_with_tol(cov, disp, *modes, io.tol).map_err(|e| io.fail(EXIT_INVALID, e))?
        }
        _ => match spec.build_with_tol(io.tol) {
            Ok(state) => state.validate(),
            Err(Error::InvalidState(report)) => report,
            Err(e) => return Err(io.fail(EXIT_INVALID, e)),
        },
    };
    let written = if json {
        writeln!(io.out, "{}", serde_json::to_string_pretty(&report).expect("serializable"))
    } else if report.is_ok() {
        writeln!(io.out, "ok")
    } else {
        report.violations().iter().try_for_each(|v| {
            writeln!(
                io.out,
                "violation: {} (measured {:e}, threshold {:e})",
                v.check, v.measured, v.threshold
            )
        })
    };
    written.map_err(|e| io_err(io, e))?;
    Ok(if report.is_ok() { EXIT_OK } else { EXIT_INVALID })
}

fn report_json(state: &GaussianState, r: &CoherenceReport) -> serde_json::Value {
    json!({
        "coherence_bits": r.coherence_bits,
        "entropy_bits": r.entropy_bits,
        "mean_photons": r.mean_photons,
        "symplectic_eigenvalues": r.symplectic.values(),
        "incoherent": is_incoherent(state, INCOHERENT_TOL),
        "state": StateSpecDocument::from_state(state),
        "closest_incoherent": StateSpecDocument::from_state(&r.closest_incoherent),
    })
}

fn cmd_coherence(io: &mut Io<'_>, path: &PathBuf, json: bool) -> CmdResult {
    let state = io.state(path)?;
    let r = coherence(&state).map_err(|e| io.fail(EXIT_INVALID, e))?;
    let written = if json {
        writeln!(
            io.out,
            "{}",
            serde_json::to_string_pretty(&report_json(&state, &r)).expect("serializable")
        )
    } else {
        (|| {
            writeln!(io.out, "modes:      {}", state.modes())?;
            writeln!(io.out, "coherence:  {} bits", r.coherence_bits)?;
            writeln!(io.out, "entropy:    {} bits", r.entropy_bits)?;
            for (i, n) in r.mean_photons.iter().enumerate() {
                writeln!(io.out, "nbar_{}:     {n}", i + 1)?;
            }
            for (i, nu) in r.symplectic.values().iter().enumerate() {
                writeln!(io.out, "nu_{}:       {nu}", i + 1)?;
            }
            let parts: Vec<String> = r
                .mean_photons
                .iter()
                .map(|n| format!("thermal(nbar = {n})"))
                .collect();
            writeln!(io.out, "closest incoherent state: {}", parts.join(" ⊗ "))
        })()
    };
    written.map_err(|e| io_err(io, e))?;
    Ok(EXIT_OK)
}

fn trajectory_row(step: usize, state: &GaussianState) -> crate::error::Result<TrajectoryRow> {
    let r = coherence(state)?;
    Ok(TrajectoryRow {
        step,
        coherence: r.coherence_bits,
        entropy: r.entropy_bits,
        mean_photons: r.mean_photons,
        symplectic: r.symplectic.values().to_vec(),
    })
}

fn cmd_evolve(
    io: &mut Io<'_>,
    state_path: &PathBuf,
    channel_path: &PathBuf,
    steps: usize,
    csv: Option<&PathBuf>,
) -> CmdResult {
    let mut state = io.state(state_path)?;
    let input: ChannelInput = io.parse(channel_path)?;
    let tol = io.tol;
    let channel = input.build_with_tol(tol).map_err(|e| io.fail(EXIT_INVALID, e))?;
    if channel.modes() != state.modes() {
        return Err(io.fail(EXIT_INVALID, Error::ModeMismatch(channel.modes(), state.modes())));
    }
    let monitored = classify_incoherent(&channel).is_ok();

    let mut lines = vec![csv_header(state.modes())];
    let mut rows = Vec::with_capacity(steps + 1);
    for step in 0..=steps {
        if step > 0 {
            state = apply(&channel, &state).map_err(|e| io.fail(EXIT_INVALID, e))?;
        }
        let row = trajectory_row(step, &state).map_err(|e| io.fail(EXIT_NUMERICAL, e))?;
        lines.push(row.to_csv());
        rows.push(row);
    }
    let text = lines.join("\n") + "\n";
    match csv {
        Some(p) => fs::write(p, text)
            .map_err(|e| io.fail(EXIT_INVALID, format!("writing {}: {e}", p.display())))?,
        None => io.out.write_all(text.as_bytes()).map_err(|e| io_err(io, e))?,
    }

    let mut code = EXIT_OK;
    if monitored {
        for pair in rows.windows(2) {
            if pair[1].coherence > pair[0].coherence + MONOTONE_SLACK {
                let _ = writeln!(
                    io.err,
                    "warning: coherence increased under an incoherent channel at step {}: {} -> {}",
                    pair[1].step,
                    format_float(pair[0].coherence),
                    format_float(pair[1].coherence)
                );
                code = EXIT_NUMERICAL;
            }
        }
    }
    Ok(code)
}

fn cmd_check_incoherent(io: &mut Io<'_>, path: &PathBuf, json: bool) -> CmdResult {
    let input: ChannelInput = io.parse(path)?;
    let tol = io.tol;
    let channel = input.build_with_tol(tol).map_err(|e| io.fail(EXIT_INVALID, e))?;
    let written;
    let code;
    match classify_incoherent(&channel) {
        Ok(dec) => {
            code = EXIT_OK;
            written = if json {
                writeln!(
                    io.out,
                    "{}",
                    serde_json::to_string_pretty(&json!({"incoherent": true, "decomposition": dec}))
                        .expect("serializable")
                )
            } else {
                (|| {
                    writeln!(io.out, "incoherent")?;
                    let perm: Vec<String> = dec
                        .permutation
                        .iter()
                        .enumerate()
                        .map(|(j, i)| format!("{} -> {}", j + 1, i + 1))
                        .collect();
                    writeln!(io.out, "permutation (input -> output): {}", perm.join(", "))?;
                    for (i, b) in dec.modes.iter().enumerate() {
                        writeln!(
                            io.out,
                            "mode {}: t = {}, theta = {}, det O = {}, w = {}",
                            i + 1,
                            b.t,
                            b.theta,
                            b.det_o,
                            b.w
                        )?;
                    }
                    Ok(())
                })()
            };
        }
        Err(rej) => {
            code = EXIT_NEGATIVE;
            written = if json {
                writeln!(
                    io.out,
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "incoherent": false,
                        "condition": rej.condition().to_string(),
                        "reason": rej.to_string(),
                    }))
                    .expect("serializable")
                )
            } else {
                writeln!(io.out, "not incoherent: {rej}")
            };
        }
    }
    written.map_err(|e| io_err(io, e))?;
    Ok(code)
}

fn cmd_oracle_compare(io: &mut Io<'_>, path: &PathBuf, cutoff: Option<usize>) -> CmdResult {
    let state = io.state(path)?;
    if state.modes() != 1 {
        return Err(io.fail(EXIT_INVALID, "oracle is one-mode only"));
    }
    let cutoff = cutoff.unwrap_or_else(|| default_cutoff(&state));
    let analytic = coherence(&state).map_err(|e| io.fail(EXIT_INVALID, e))?;
    let fm = fock_matrix(&state, cutoff).map_err(|e| io.fail(EXIT_NUMERICAL, e))?;
    let residual = diagonality_residual(&fm);
    let incoherent = is_incoherent(&state, INCOHERENT_TOL);

    let mut w = |line: String| writeln!(io.out, "{line}");
    let written = (|| {
        w(format!("cutoff:               {cutoff}"))?;
        w(format!("trace deficit:        {:e}", fm.trace_deficit))?;
        w(format!("diagonality residual: {residual:e} (closed form says incoherent: {incoherent})"))
    })();
    written.map_err(|e| io_err(io, e))?;

    if fm.trace_deficit > COHERENCE_MAX_DEFICIT {
        let _ = writeln!(
            io.err,
            "trace deficit flag: {:e} exceeds {COHERENCE_MAX_DEFICIT:e}; raise --cutoff",
            fm.trace_deficit
        );
        return Ok(EXIT_NUMERICAL);
    }
    let nbar = oracle_mean_photon(&fm).map_err(|e| io.fail(EXIT_NUMERICAL, e))?;
    let c_oracle = oracle_coherence(&fm).map_err(|e| io.fail(EXIT_NUMERICAL, e))?;
    let dn = (nbar - analytic.mean_photons[0]).abs();
    let dc = (c_oracle - analytic.coherence_bits).abs();
    let nbar_tol = ORACLE_NBAR_TOL.max(10.0 * (cutoff as f64 + 1.0) * fm.trace_deficit);
    let diag_ok = !incoherent || residual <= INCOHERENT_TOL;

    let written = (|| {
        writeln!(io.out, "{:<22}{:>24}{:>24}{:>12}", "quantity", "closed form", "oracle", "delta")?;
        writeln!(
            io.out,
            "{:<22}{:>24.16e}{:>24.16e}{:>12.3e}",
            "nbar", analytic.mean_photons[0], nbar, dn
        )?;
        writeln!(
            io.out,
            "{:<22}{:>24.16e}{:>24.16e}{:>12.3e}",
            "coherence (bits)", analytic.coherence_bits, c_oracle, dc
        )
    })();
    written.map_err(|e| io_err(io, e))?;

    let ok = dn <= nbar_tol && dc <= ORACLE_COHERENCE_TOL && diag_ok;
    let _ = writeln!(io.out, "{}", if ok { "agree" } else { "DISAGREE" });
    Ok(if ok { EXIT_OK } else { EXIT_NUMERICAL })
}

fn cmd_selftest(io: &mut Io<'_>, seed: u64, trials: usize) -> CmdResult {
    let outcomes = crate::selftest::run_all(seed, trials);
    let mut all = true;
    for o in &outcomes {
        all &= o.passed();
        writeln!(
            io.out,
            "{} {:<48} {:>5} trials, {:>3} failures, worst deviation {:e}",
            if o.passed() { "PASS" } else { "FAIL" },
            o.name,
            o.trials,
            o.failures,
            o.worst
        )
        .map_err(|e| io_err(io, e))?;
    }
    Ok(if all { EXIT_OK } else { EXIT_NUMERICAL })
}
