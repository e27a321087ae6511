//! Command-line front end.
//!
//! Frequencies are angular (rad/ns) and temperatures are in mK. Every flag
//! may also be given in a `--config` file as `key = value` lines; flags on
//! the command line win over the file.

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Args, ColorChoice, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use crate::bath::Transition;
use crate::dynamics::{build_liouvillian, channel_rates, evolve_with, steady_state, RateLabeling, Trajectory};
use crate::entanglement::concurrence;
use crate::error::{Error, Result};
use crate::experiments::{
    default_horizon, linspace, sweep_t1_t2, sweep_t_lambda, sweep_time_weight_with, Family, InitialStateSpec, SweepGrid,
};
use crate::model::{eigensystem, to_computational, Level, SystemParams, Variant};
use crate::numerics::{Tolerances, C64};

#[derive(Parser, Debug)]
#[command(name = "twoqubit", version, about = "Two coupled qubits in independent thermal baths")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Energies, mixing angles and transition frequencies.
    Spectrum(Common),
    /// Microscopic and aggregate rates, with both channel labelings.
    Rates(Common),
    /// Integrate the master equation from an initial state.
    Evolve(EvolveArgs),
    /// Stationary populations and concurrence.
    Steady(SteadyArgs),
    /// Concurrence over a parameter grid.
    Sweep(SweepArgs),
}

fn finite(s: &str) -> std::result::Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn variant(s: &str) -> std::result::Result<Variant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Qubit 1 angular frequency, rad/ns.
    #[arg(long, default_value_t = 5.0, value_parser = finite, allow_hyphen_values = true)]
    pub omega1: f64,
    /// Qubit 2 angular frequency, rad/ns.
    #[arg(long, default_value_t = 5.0, value_parser = finite, allow_hyphen_values = true)]
    pub omega2: f64,
    /// Qubit-qubit coupling, rad/ns.
    #[arg(long, default_value_t = 5.0, value_parser = finite, allow_hyphen_values = true)]
    pub lambda: f64,
    /// Ohmic strength of bath 1.
    #[arg(long, default_value_t = 5e-3, value_parser = finite, allow_hyphen_values = true)]
    pub alpha1: f64,
    /// Ohmic strength of bath 2.
    #[arg(long, default_value_t = 5e-3, value_parser = finite, allow_hyphen_values = true)]
    pub alpha2: f64,
    /// Bath 1 temperature, mK.
    #[arg(long = "t1-mk", default_value_t = 0.0, value_parser = finite, allow_hyphen_values = true)]
    pub t1_mk: f64,
    /// Bath 2 temperature, mK.
    #[arg(long = "t2-mk", default_value_t = 0.0, value_parser = finite, allow_hyphen_values = true)]
    pub t2_mk: f64,
    /// Coupling form: full (with counter-rotating terms) or rwa.
    #[arg(long, default_value = "full", value_parser = variant)]
    pub variant: Variant,
    /// Integrator relative tolerance.
    #[arg(long, value_parser = finite)]
    pub rtol: Option<f64>,
    /// Integrator absolute tolerance.
    #[arg(long, value_parser = finite)]
    pub atol: Option<f64>,
    /// File of `key = value` lines supplying any of these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Common {
    pub fn params(&self) -> SystemParams {
        SystemParams {
            omega1: self.omega1,
            omega2: self.omega2,
            lambda: self.lambda,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            t1_mk: self.t1_mk,
            t2_mk: self.t2_mk,
            variant: self.variant,
        }
    }

    pub fn tolerances(&self) -> Tolerances {
        let mut tol = Tolerances::default();
        if let Some(r) = self.rtol {
            tol.rtol = r;
        }
        if let Some(a) = self.atol {
            tol.atol = a;
        }
        tol
    }
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// basis:<00|01|10|11> | eigen:<a|b|c|d> | onebit:p=<x> | twobit:p=<x> | ket:<c>,<c>,<c>,<c>
    #[arg(long, default_value = "onebit:p=0.5", value_parser = parse_initial_arg)]
    pub initial: InitialStateSpec,
    /// Final time, ns [default: 10/(c_I + cbar_I)].
    #[arg(long = "t-max", value_parser = finite)]
    pub t_max: Option<f64>,
    /// Number of evenly spaced output times from 0 to t-max.
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    /// Output CSV path [default: standard output].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the computational-basis density matrix.
    #[arg(long = "full-state")]
    pub full_state: bool,
}

#[derive(Args, Debug)]
pub struct SteadyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Vary {
    /// Initial-state weight and time.
    P,
    /// Common temperature and coupling.
    Tlambda,
    /// The two bath temperatures.
    T1t2,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub vary: Vary,
    /// Initial-state family for `--vary p`.
    #[arg(long, default_value = "onebit")]
    pub family: Family,
    /// Axis grid `<axis>=<start>:<stop>:<count>`; repeatable.
    #[arg(long, value_parser = parse_grid_arg)]
    pub grid: Vec<GridSpec>,
    /// Final time for `--vary p` when no t grid is given.
    #[arg(long = "t-max", value_parser = finite)]
    pub t_max: Option<f64>,
    /// Time samples for `--vary p` when no t grid is given.
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub axis: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.count)
    }
}

fn parse_grid_arg(s: &str) -> std::result::Result<GridSpec, String> {
    let (axis, range) = s.split_once('=').ok_or("expected <axis>=<start>:<stop>:<count>")?;
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err("expected <axis>=<start>:<stop>:<count>".into());
    }
    let count: usize = parts[2].trim().parse().map_err(|_| format!("count '{}' is not a positive integer", parts[2]))?;
    if count == 0 {
        return Err("grid count must be >= 1".into());
    }
    Ok(GridSpec { axis: axis.trim().to_string(), start: finite(parts[0])?, stop: finite(parts[1])?, count })
}

/// Initial-state parse failure, located by character offset.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpecError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for StateSpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at character {})", self.message, self.offset)
    }
}

impl std::error::Error for StateSpecError {}

fn parse_initial_arg(s: &str) -> std::result::Result<InitialStateSpec, StateSpecError> {
    parse_initial_state(s)
}

struct Scanner<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    text: &'a str,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str, from: usize) -> Self {
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let pos = chars.iter().position(|&(b, _)| b >= from).unwrap_or(chars.len());
        Self { chars, pos, text }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn byte(&self, pos: usize) -> usize {
        self.chars.get(pos).map_or(self.text.len(), |&(b, _)| b)
    }

    fn err(&self, message: impl Into<String>) -> StateSpecError {
        StateSpecError { offset: self.pos, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        self.pos - start
    }

    /// `[sign] digits [. digits] [e [sign] digits]`
    fn float(&mut self) -> std::result::Result<f64, StateSpecError> {
        let start = self.pos;
        if matches!(self.peek(), Some('+' | '-')) {
            self.pos += 1;
        }
        let mut n = self.digits();
        if self.peek() == Some('.') {
            self.pos += 1;
            n += self.digits();
        }
        if n == 0 {
            self.pos = start;
            return Err(self.err("expected a number"));
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            if self.digits() == 0 {
                self.pos = mark;
            }
        }
        let slice = &self.text[self.byte(start)..self.byte(self.pos)];
        match slice.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => {
                self.pos = start;
                Err(self.err(format!("number '{slice}' is out of range")))
            }
        }
    }

    fn complex(&mut self) -> std::result::Result<C64, StateSpecError> {
        let re = self.float()?;
        if matches!(self.peek(), Some('+' | '-')) {
            let im = self.float()?;
            if self.peek() != Some('i') {
                return Err(self.err("expected 'i' after imaginary part"));
            }
            self.pos += 1;
            Ok(C64::new(re, im))
        } else {
            Ok(C64::new(re, 0.0))
        }
    }

    fn expect_end(&mut self) -> std::result::Result<(), StateSpecError> {
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(self.err(format!("unexpected character '{c}'"))),
        }
    }
}

/// Parse the initial-state mini-language. Offsets in errors count
/// characters from the start of `text`.
pub fn parse_initial_state(text: &str) -> std::result::Result<InitialStateSpec, StateSpecError> {
    let Some(colon) = text.find(':') else {
        return Err(StateSpecError {
            offset: text.chars().count(),
            message: "expected '<family>:' (basis, eigen, onebit, twobit or ket)".into(),
        });
    };
    let family = &text[..colon];
    let body_start = text[..=colon].chars().count();
    let body = &text[colon + 1..];
    let at_body = |message: String| StateSpecError { offset: body_start, message };
    match family {
        "basis" => {
            let k = match body {
                "00" => 0,
                "01" => 1,
                "10" => 2,
                "11" => 3,
                _ => return Err(at_body(format!("expected one of 00, 01, 10, 11, got '{body}'"))),
            };
            Ok(InitialStateSpec::Basis(k))
        }
        "eigen" => {
            let level = match body {
                "a" => Level::A,
                "b" => Level::B,
                "c" => Level::C,
                "d" => Level::D,
                _ => return Err(at_body(format!("expected one of a, b, c, d, got '{body}'"))),
            };
            Ok(InitialStateSpec::Eigen(level))
        }
        "onebit" | "twobit" => {
            if !body.starts_with("p=") {
                return Err(at_body("expected 'p=<weight>'".into()));
            }
            let mut sc = Scanner::new(text, colon + 3);
            let value_at = sc.pos;
            let p = sc.float()?;
            sc.expect_end()?;
            if !(0.0..=1.0).contains(&p) {
                return Err(StateSpecError { offset: value_at, message: format!("weight p = {p} outside [0, 1]") });
            }
            Ok(if family == "onebit" { InitialStateSpec::Onebit(p) } else { InitialStateSpec::Twobit(p) })
        }
        "ket" => {
            let mut sc = Scanner::new(text, colon + 1);
            let mut amps = Vec::with_capacity(4);
            loop {
                sc.skip_ws();
                amps.push(sc.complex()?);
                sc.skip_ws();
                match sc.peek() {
                    Some(',') if amps.len() < 4 => sc.pos += 1,
                    None if amps.len() == 4 => break,
                    None => return Err(sc.err(format!("expected 4 amplitudes, got {}", amps.len()))),
                    Some(c) => return Err(sc.err(format!("unexpected character '{c}'"))),
                }
            }
            let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if !(norm >= 1e-12) || !norm.is_finite() {
                return Err(at_body("ket has zero norm".into()));
            }
            Ok(InitialStateSpec::Ket(amps.iter().map(|z| z / norm).collect()))
        }
        _ => Err(StateSpecError {
            offset: 0,
            message: format!("unknown family '{family}' (expected basis, eigen, onebit, twobit or ket)"),
        }),
    }
}

/// C's `%.<prec>g`.
pub fn fmt_g(x: f64, prec: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let prec = prec.max(1);
    let sci = format!("{:.*e}", prec - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= prec as i32 {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (prec as i32 - 1 - exp) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Header plus numeric rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn from_trajectory(traj: &Trajectory, full_state: bool) -> Self {
        let mut header: Vec<String> =
            ["t_ns", "pop_a", "pop_b", "pop_c", "pop_d", "concurrence"].iter().map(|s| s.to_string()).collect();
        if full_state {
            for j in 0..4 {
                for k in j..4 {
                    header.push(format!("re_rho_{j}{k}"));
                    header.push(format!("im_rho_{j}{k}"));
                }
            }
        }
        let rows = (0..traj.len())
            .map(|n| {
                let mut row = vec![traj.times[n]];
                row.extend_from_slice(&traj.populations[n]);
                row.push(traj.concurrence[n]);
                if full_state {
                    let m = traj.states[n].matrix();
                    for j in 0..4 {
                        for k in j..4 {
                            row.push(m[(j, k)].re);
                            row.push(m[(j, k)].im);
                        }
                    }
                }
                row
            })
            .collect();
        Self { header, rows }
    }

    pub fn from_grid(grid: &SweepGrid) -> Self {
        let mut header: Vec<String> = grid.axes.iter().map(|a| a.name.to_string()).collect();
        header.push("concurrence".into());
        let rows = grid
            .points()
            .map(|(mut coords, v)| {
                coords.push(v);
                coords
            })
            .collect();
        Self { header, rows }
    }
}

pub fn render_csv(table: &Table, w: &mut dyn Write) -> io::Result<()> {
    writeln!(w, "{}", table.header.join(","))?;
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_g(x, 12)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()
}

/// Write to `dest`, or to `stdout` when no path is given.
pub fn write_csv(table: &Table, dest: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match dest {
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::Io(format!("cannot create {}: {e}", path.display())))?;
            render_csv(table, &mut BufWriter::new(file))
                .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
        }
        None => render_csv(table, stdout).map_err(|e| Error::Io(format!("cannot write output: {e}"))),
    }
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn color_allowed() -> bool {
    std::env::var_os("NO_COLOR").map_or(true, |v| v.is_empty())
}

struct Diagnostics<'a> {
    w: &'a mut dyn Write,
    color: bool,
}

impl Diagnostics<'_> {
    fn emit(&mut self, label: &str, ansi: &str, message: &str) {
        let _ = if self.color {
            writeln!(self.w, "\x1b[{ansi}m{label}:\x1b[0m {message}")
        } else {
            writeln!(self.w, "{label}: {message}")
        };
    }

    fn warn(&mut self, message: &str) {
        self.emit("warning", "33", message);
    }

    fn error(&mut self, message: &str) {
        self.emit("error", "31", message);
    }
}

/// Expand `--config <path>` into flags placed right after the subcommand,
/// so that flags given explicitly (which come later) take precedence.
fn expand_config(args: Vec<OsString>) -> std::result::Result<Vec<OsString>, Failure> {
    let mut path = None;
    let mut iter = args.iter().enumerate().skip(2);
    while let Some((_, a)) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = iter.next().map(|(_, v)| PathBuf::from(v));
        } else if let Some(v) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(v));
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure::Runtime(Error::Io(format!("cannot read config {}: {e}", path.display()))))?;
    let mut injected = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Failure::Usage(format!("{}:{}: expected 'key = value'", path.display(), n + 1)));
        };
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        if key == "config" {
            return Err(Failure::Usage(format!("{}:{}: nested config is not supported", path.display(), n + 1)));
        }
        if key == "full-state" {
            match value {
                "true" => injected.push(OsString::from("--full-state")),
                "false" => {}
                _ => return Err(Failure::Usage(format!("{}:{}: full-state must be true or false", path.display(), n + 1))),
            }
            continue;
        }
        injected.push(OsString::from(format!("--{key}")));
        injected.push(OsString::from(value));
    }
    let mut out = args[..2].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[2..]);
    Ok(out)
}

/// Parse and run; returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let color = color_allowed();
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let mut diag = Diagnostics { w: stderr, color: color && io::stderr().is_terminal() };

    let args = if args.len() > 2 {
        match expand_config(args) {
            Ok(a) => a,
            Err(Failure::Usage(m)) => {
                diag.error(&m);
                return 2;
            }
            Err(Failure::Runtime(e)) => {
                diag.error(&e.to_string());
                return 1;
            }
        }
    } else {
        args
    };

    let cmd = Cli::command().color(if color { ColorChoice::Auto } else { ColorChoice::Never });
    let cli = match cmd.try_get_matches_from(args).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let tty = if e.use_stderr() { io::stderr().is_terminal() } else { io::stdout().is_terminal() };
            let text = if color && tty { e.render().ansi().to_string() } else { e.render().to_string() };
            let _ = if e.use_stderr() { write!(diag.w, "{text}") } else { write!(stdout, "{text}") };
            return code;
        }
    };

    match dispatch(cli.command, stdout, &mut diag) {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            diag.error(&m);
            2
        }
        Err(Failure::Runtime(e)) => {
            diag.error(&e.to_string());
            1
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, diag: &mut Diagnostics<'_>) -> std::result::Result<(), Failure> {
    match command {
        Command::Spectrum(c) => spectrum(&c.params(), out),
        Command::Rates(c) => rates(&c.params(), out, diag),
        Command::Evolve(a) => evolve_cmd(&a, out, diag),
        Command::Steady(a) => steady_cmd(&a, out, diag),
        Command::Sweep(a) => sweep_cmd(&a, out, diag),
    }
}

fn io_err(e: io::Error) -> Failure {
    Failure::Runtime(Error::Io(format!("cannot write output: {e}")))
}

fn spectrum(p: &SystemParams, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let es = eigensystem(p)?;
    let g = |x: f64| fmt_g(x, 12);
    let mut s = String::new();
    s.push_str("level energy amp_00 amp_01 amp_10 amp_11\n");
    for level in Level::ALL {
        let k = es.kets[level.index()];
        s.push_str(&format!(
            "{} {} {} {} {} {}\n",
            level.name(),
            g(es.energy(level)),
            g(k[0]),
            g(k[1]),
            g(k[2]),
            g(k[3])
        ));
    }
    s.push_str(&format!("theta_I {}\n", g(es.theta_i)));
    s.push_str(&format!("sin_theta_I {}\n", g(es.theta_i.sin())));
    s.push_str(&format!("theta_II {}\n", g(es.theta_ii)));
    s.push_str(&format!("sin_theta_II {}\n", g(es.theta_ii.sin())));
    s.push_str(&format!("omega_I {}\n", g(es.omega_i)));
    s.push_str(&format!("omega_II {}\n", g(es.omega_ii)));
    out.write_all(s.as_bytes()).map_err(io_err)
}

fn rates(p: &SystemParams, out: &mut dyn Write, diag: &mut Diagnostics<'_>) -> std::result::Result<(), Failure> {
    let l = build_liouvillian(p)?;
    if let Some(w) = l.secular_warning() {
        diag.warn(&w);
    }
    let r = l.rates();
    let g = |x: f64| fmt_g(x, 12);
    let mut s = String::new();
    for t in Transition::ALL {
        let label = ["I", "II"][t.index()];
        for res in 0..2 {
            s.push_str(&format!("gamma_{label}_{} {}\n", res + 1, g(r.gamma[t.index()][res])));
            s.push_str(&format!("gammabar_{label}_{} {}\n", res + 1, g(r.gamma_bar[t.index()][res])));
        }
    }
    for (name, v) in [
        ("c_I", r.c_i),
        ("c_II", r.c_ii),
        ("cbar_I", r.cbar_i),
        ("cbar_II", r.cbar_ii),
        ("c_cr_I", r.c_cr_i),
        ("c_cr_II", r.c_cr_ii),
        ("cbar_cr_I", r.cbar_cr_i),
        ("cbar_cr_II", r.cbar_cr_ii),
    ] {
        s.push_str(&format!("{name} {}\n", g(v)));
    }
    s.push_str("channel rate_equations as_printed\n");
    let used = channel_rates(r, RateLabeling::RateEquations);
    let printed = channel_rates(r, RateLabeling::AsPrinted);
    for (u, q) in used.iter().zip(&printed) {
        s.push_str(&format!(
            "{}->{} {}={} {}={}{}\n",
            u.from.name(),
            u.to.name(),
            u.symbol,
            g(u.rate),
            q.symbol,
            g(q.rate),
            if u.symbol != q.symbol { " differs" } else { "" }
        ));
    }
    out.write_all(s.as_bytes()).map_err(io_err)
}

fn evolve_cmd(a: &EvolveArgs, out: &mut dyn Write, diag: &mut Diagnostics<'_>) -> std::result::Result<(), Failure> {
    let p = a.common.params();
    let l = build_liouvillian(&p)?;
    if let Some(w) = l.secular_warning() {
        diag.warn(&w);
    }
    let t_max = match a.t_max {
        Some(t) if t >= 0.0 => t,
        Some(t) => return Err(Failure::Usage(format!("--t-max must be >= 0, got {t}"))),
        None => default_horizon(&p)?,
    };
    if a.samples > 1 && t_max == 0.0 {
        return Err(Failure::Usage("--t-max must be > 0 with more than one sample".into()));
    }
    let times = linspace(0.0, t_max, a.samples);
    let rho0 = a.initial.to_density(l.eigensystem())?;
    let traj = evolve_with(&l, &rho0, &times, &a.common.tolerances())?;
    write_csv(&Table::from_trajectory(&traj, a.full_state), a.out.as_deref(), out)?;
    Ok(())
}

fn steady_cmd(a: &SteadyArgs, out: &mut dyn Write, diag: &mut Diagnostics<'_>) -> std::result::Result<(), Failure> {
    let p = a.common.params();
    let l = build_liouvillian(&p)?;
    if let Some(w) = l.secular_warning() {
        diag.warn(&w);
    }
    let ss = steady_state(&l)?;
    let c = concurrence(&to_computational(&ss, l.eigensystem())?)?.value;
    let mut row = ss.populations().to_vec();
    row.push(c);
    let table = Table {
        header: ["pop_a", "pop_b", "pop_c", "pop_d", "concurrence"].iter().map(|s| s.to_string()).collect(),
        rows: vec![row],
    };
    write_csv(&table, a.out.as_deref(), out)?;
    Ok(())
}

/// Canonical axis key: lower case, unit suffix dropped.
fn axis_key(name: &str) -> String {
    let lower = name.to_ascii_lowercase();
    lower.trim_end_matches("_mk").trim_end_matches("_ns").to_string()
}

fn take_axis(grids: &[GridSpec], keys: &[&str], default: impl FnOnce() -> Vec<f64>) -> Vec<f64> {
    grids.iter().rev().find(|g| keys.contains(&axis_key(&g.axis).as_str())).map_or_else(default, GridSpec::values)
}

fn sweep_cmd(a: &SweepArgs, out: &mut dyn Write, diag: &mut Diagnostics<'_>) -> std::result::Result<(), Failure> {
    let p = a.common.params();
    let l = build_liouvillian(&p)?;
    if let Some(w) = l.secular_warning() {
        diag.warn(&w);
    }
    let allowed: &[&str] = match a.vary {
        Vary::P => &["p", "t", "time"],
        Vary::Tlambda => &["t", "lambda"],
        Vary::T1t2 => &["t1", "t2"],
    };
    if let Some(bad) = a.grid.iter().find(|g| !allowed.contains(&axis_key(&g.axis).as_str())) {
        return Err(Failure::Usage(format!(
            "axis '{}' does not apply to --vary {:?}; expected one of {}",
            bad.axis,
            a.vary,
            allowed.join(", ")
        )
        .to_lowercase()));
    }
    let grid = match a.vary {
        Vary::P => {
            let ps = take_axis(&a.grid, &["p"], || linspace(0.0, 1.0, 21));
            let horizon = match a.t_max {
                Some(t) => t,
                None => default_horizon(&p)?,
            };
            let ts = take_axis(&a.grid, &["t", "time"], || linspace(0.0, horizon, a.samples));
            sweep_time_weight_with(a.family, &ps, &ts, &p, &a.common.tolerances())?
        }
        Vary::Tlambda => {
            let ts = take_axis(&a.grid, &["t"], || linspace(0.0, 50.0, 26));
            let lams = take_axis(&a.grid, &["lambda"], || linspace(0.5, 50.0, 100));
            sweep_t_lambda(&ts, &lams, &p)?
        }
        Vary::T1t2 => {
            let t1 = take_axis(&a.grid, &["t1"], || linspace(0.0, 50.0, 26));
            let t2 = take_axis(&a.grid, &["t2"], || linspace(0.0, 50.0, 26));
            sweep_t1_t2(&t1, &t2, &p)?
        }
    };
    write_csv(&Table::from_grid(&grid), a.out.as_deref(), out)?;
    Ok(())
}
