//! Run configuration: per-command key tables, config files and flags.
//!
//! Every command owns a fixed table of keys. The same table drives the
//! clap parser, config-file validation and the manifest, so a manifest is
//! always a valid config file for the run that wrote it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind as ClapKind;
use clap::{Arg, Command};
use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{CliError, CliResult};
use crate::expr;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kind {
    /// Integer `≥ min`.
    Int(u64),
    /// Real expression in numbers and `pi`.
    Real,
    PosReal,
    /// Real expression that may use the field `B`; positive.
    Energy,
    /// `auto` or a density in `(0, 1]`.
    Rho,
    /// Comma-separated positive reals, at least one.
    List,
    /// Two positive reals `a,b`, or `auto` when allowed.
    Pair { auto: bool },
    Bool,
    /// File path; empty means absent unless `required`.
    Path { required: bool },
    Choice(&'static [&'static str]),
    /// Three exact rationals `p/q,p/q,p/q`.
    Rationals,
}

#[derive(Clone, Copy, Debug)]
pub struct KeySpec {
    pub name: &'static str,
    pub default: &'static str,
    pub kind: Kind,
    pub help: &'static str,
}

const fn key(name: &'static str, default: &'static str, kind: Kind, help: &'static str) -> KeySpec {
    KeySpec { name, default, kind, help }
}

const COMMON: &[KeySpec] = &[
    key("seed", "0", Kind::Int(0), "master seed"),
    key("out", "", Kind::Path { required: false }, "output directory for CSV, plot data and manifest"),
    key("workers", "1", Kind::Int(1), "worker threads for parallel sweeps"),
];

const PATTERNS: &[&str] = &["strips", "checkerboard"];

const FM: &[KeySpec] = &[key("m", "2", Kind::Int(0), "order of F_m")];

const WEYL: &[KeySpec] = &[
    key("m_max", "6", Kind::Int(1), "largest m for the planar recursion check"),
    key("field", "1,1,1", Kind::Rationals, "3-D field (b1,b2,b3) as exact rationals"),
    key("power", "2", Kind::Int(1), "power of R in the 3-D check"),
];

const BERNSTEIN: &[KeySpec] = &[
    key("B", "1", Kind::PosReal, "field strength"),
    key("samples", "50", Kind::Int(1), "random functions"),
    key("m_max", "3", Kind::Int(0), "largest derivative order"),
    key("levels", "2", Kind::Int(0), "highest Landau level in the samples"),
    key("tol", "1e-4", Kind::PosReal, "relative slack of the L2 checks"),
    key("tol_l1", "1e-3", Kind::PosReal, "relative slack of the L1 check"),
];

const THICKNESS: &[KeySpec] = &[
    key("mask", "", Kind::Path { required: true }, "PBM (P1) mask"),
    key("l", "", Kind::Pair { auto: false }, "window sides l1,l2"),
    key("h", "1", Kind::PosReal, "cell side"),
    key("periodic", "false", Kind::Bool, "wrap windows around the box"),
];

const SPECINEQ: &[KeySpec] = &[
    key("mask", "", Kind::Path { required: false }, "PBM mask on the N x N torus grid; overrides pattern"),
    key("pattern", "strips", Kind::Choice(PATTERNS), "built-in mask"),
    key("block", "3", Kind::Int(1), "pattern block width in cells"),
    key("E", "3B", Kind::Energy, "energy cutoff"),
    key("B", "1", Kind::PosReal, "field strength"),
    key("n_phi", "2", Kind::Int(1), "flux quanta through the torus"),
    key("N", "24", Kind::Int(4), "grid points per side"),
    key("l", "auto", Kind::Pair { auto: true }, "thickness scale; auto is a quarter of the box"),
    key("rho", "auto", Kind::Rho, "claimed density; auto uses the certified value"),
];

const REMEZ: &[KeySpec] = &[
    key("trials", "200", Kind::Int(1), "random instances per check"),
    key("degree_max", "10", Kind::Int(0), "largest polynomial degree"),
];

const CONTROL: &[KeySpec] = &[
    key("mask", "", Kind::Path { required: false }, "PBM control set on the N x N torus grid"),
    key("pattern", "strips", Kind::Choice(PATTERNS), "built-in control set"),
    key("block", "3", Kind::Int(1), "pattern block width in cells"),
    key("B", "1", Kind::PosReal, "field strength"),
    key("n_phi", "4", Kind::Int(1), "flux quanta through the torus"),
    key("N", "24", Kind::Int(4), "grid points per side"),
    key("levels", "2", Kind::Int(1), "Landau clusters kept in the subspace"),
    key("l", "auto", Kind::Pair { auto: true }, "thickness scale; auto is a quarter of the box"),
    key("rho", "auto", Kind::Rho, "claimed density; auto uses the certified value"),
    key("T", "0.2,0.5,1,2,4", Kind::List, "control horizons"),
    key("eps", "1e-8", Kind::PosReal, "terminal residual target"),
    key("c5", "1", Kind::PosReal, "cost-bound constant C5"),
    key("c6", "1", Kind::PosReal, "cost-bound constant C6"),
    key("c7", "1", Kind::PosReal, "cost-bound constant C7"),
    key("trajectory", "false", Kind::Bool, "also write the controlled trajectory"),
];

const WEGNER: &[KeySpec] = &[
    key("L", "4,8", Kind::List, "integer box sides"),
    key("B", "pi/4", Kind::PosReal, "field strength"),
    key("cells", "6", Kind::Int(1), "grid points per unit length"),
    key("m0", "0", Kind::Real, "lower end of the coupling law"),
    key("M0", "1", Kind::Real, "upper end of the coupling law"),
    key("E", "1.07B", Kind::Energy, "window centre, inside the disordered lowest band"),
    key("eps", "0.00125,0.0025,0.00375,0.005,0.0075,0.01", Kind::List, "window half-widths"),
    key("trials", "200", Kind::Int(1), "Monte Carlo trials per box"),
    key("radius", "0.5", Kind::PosReal, "single-site bump radius, at most 1/2"),
    key("cantor_levels", "2", Kind::Int(0), "fat Cantor levels of the bump"),
];

pub const COMMANDS: &[(&str, &str, &[KeySpec])] = &[
    ("fm", "print F_m", FM),
    ("weyl-verify", "exact recursion and 3-D breakdown checks", WEYL),
    ("bernstein", "continuum Bernstein sums against their constants", BERNSTEIN),
    ("thickness", "certified thickness of a PBM mask", THICKNESS),
    ("specineq", "empirical against traced spectral-inequality constants", SPECINEQ),
    ("remez", "randomized 1-D Remez and Kovrijkine checks", REMEZ),
    ("control", "HUM controls and cost bounds for the projected heat equation", CONTROL),
    ("wegner", "Monte Carlo Wegner sweep", WEGNER),
];

/// Full key table of a command, common keys included.
pub fn keys(command: &str) -> Option<Vec<KeySpec>> {
    COMMANDS
        .iter()
        .find(|(name, _, _)| *name == command)
        .map(|(_, _, ks)| ks.iter().chain(COMMON).copied().collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: String,
    /// Resolved value of every key of the command.
    pub values: BTreeMap<String, String>,
}

fn cfg_err(key: &str, value: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("--{key} {value:?}: {why}"))
}

fn check_value(spec: &KeySpec, value: &str, b: Option<f64>) -> CliResult<()> {
    let v = value.trim();
    let bad = |why: &str| Err(cfg_err(spec.name, value, why));
    match spec.kind {
        Kind::Int(min) => match v.parse::<u64>() {
            Ok(n) if n >= min => Ok(()),
            Ok(_) => bad(&format!("must be at least {min}")),
            Err(_) => bad("not a non-negative integer"),
        },
        Kind::Real => expr::eval(v, None).map(|_| ()).map_err(|e| cfg_err(spec.name, value, e)),
        Kind::PosReal => match expr::eval(v, None) {
            Ok(x) if x > 0.0 => Ok(()),
            Ok(_) => bad("must be positive"),
            Err(e) => bad(&e),
        },
        Kind::Energy => match expr::eval(v, b) {
            Ok(x) if x > 0.0 => Ok(()),
            Ok(_) => bad("must be positive"),
            Err(e) => bad(&e),
        },
        Kind::Rho => {
            if v == "auto" {
                return Ok(());
            }
            match expr::eval(v, None) {
                Ok(x) if x > 0.0 && x <= 1.0 => Ok(()),
                Ok(_) => bad("ρ must lie in (0, 1]"),
                Err(e) => bad(&e),
            }
        }
        Kind::List => {
            if v.is_empty() {
                return bad("empty list");
            }
            for part in v.split(',') {
                match expr::eval(part, None) {
                    Ok(x) if x > 0.0 => {}
                    Ok(_) => return bad("entries must be positive"),
                    Err(e) => return bad(&e),
                }
            }
            Ok(())
        }
        Kind::Pair { auto } => {
            if auto && v == "auto" {
                return Ok(());
            }
            let parts: Vec<&str> = v.split(',').collect();
            if parts.len() != 2 {
                return bad("expected two values a,b");
            }
            for part in parts {
                match expr::eval(part, None) {
                    Ok(x) if x > 0.0 => {}
                    Ok(_) => return bad("entries must be positive"),
                    Err(e) => return bad(&e),
                }
            }
            Ok(())
        }
        Kind::Bool => match v {
            "true" | "false" => Ok(()),
            _ => bad("expected true or false"),
        },
        Kind::Path { required } => {
            if required && v.is_empty() {
                bad("a path is required")
            } else {
                Ok(())
            }
        }
        Kind::Choice(opts) => {
            if opts.contains(&v) {
                Ok(())
            } else {
                bad(&format!("expected one of {}", opts.join(", ")))
            }
        }
        Kind::Rationals => parse_rationals(v).map(|_| ()).map_err(|e| cfg_err(spec.name, value, e)),
    }
}

fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: BigInt = n.trim().parse().map_err(|_| format!("bad rational `{s}`"))?;
    let d: BigInt = d.trim().parse().map_err(|_| format!("bad rational `{s}`"))?;
    if d == BigInt::from(0) {
        return Err(format!("zero denominator in `{s}`"));
    }
    Ok(BigRational::new(n, d))
}

fn parse_rationals(s: &str) -> Result<[BigRational; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected three rationals b1,b2,b3".into());
    }
    Ok([parse_rational(parts[0])?, parse_rational(parts[1])?, parse_rational(parts[2])?])
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`, got {:?}", n + 1, raw.trim())))?;
        let k = k.trim().to_string();
        if out.iter().any(|(seen, _)| *seen == k) {
            return Err(CliError::Config(format!("line {}: duplicate key `{k}`", n + 1)));
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

/// Merges defaults, file entries and flags, in increasing precedence, and
/// validates every value.
pub fn resolve(command: &str, file: &[(String, String)], flags: &[(String, String)]) -> CliResult<RunConfig> {
    let table = keys(command).ok_or_else(|| CliError::Config(format!("unknown command `{command}`")))?;
    let mut values: BTreeMap<String, String> =
        table.iter().map(|k| (k.name.to_string(), k.default.to_string())).collect();
    for (k, v) in file {
        if k == "command" {
            if v != command {
                return Err(CliError::Config(format!("config file is for `{v}`, not `{command}`")));
            }
            continue;
        }
        if !values.contains_key(k) {
            return Err(CliError::Config(format!("unknown key `{k}` for `{command}`")));
        }
        values.insert(k.clone(), v.clone());
    }
    for (k, v) in flags {
        if !values.contains_key(k) {
            return Err(CliError::Config(format!("unknown key `{k}` for `{command}`")));
        }
        values.insert(k.clone(), v.clone());
    }
    let cfg = RunConfig { command: command.to_string(), values };
    let b = if table.iter().any(|k| k.name == "B") { cfg.real("B").ok() } else { None };
    for spec in &table {
        check_value(spec, &cfg.values[spec.name], b)?;
    }
    Ok(cfg)
}

fn cli() -> Command {
    let mut cmd = Command::new("magbern")
        .about("Spectral inequalities for the Landau operator: exact checks, lattice sweeps, control and disorder")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true);
    for (name, about, _) in COMMANDS {
        let mut sub = Command::new(*name).about(*about).arg(
            Arg::new("config").long("config").value_name("FILE").help("key = value file; flags take precedence"),
        );
        for k in keys(name).unwrap() {
            let help = if k.default.is_empty() { k.help.to_string() } else { format!("{} [default: {}]", k.help, k.default) };
            sub = sub.arg(Arg::new(k.name).long(k.name).value_name("VALUE").allow_hyphen_values(true).help(help));
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

/// Parses `argv` (program name first), reading `--config` if present.
pub fn parse_config<I, T>(argv: I) -> CliResult<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = cli().try_get_matches_from(argv).map_err(|e| match e.kind() {
        ClapKind::DisplayHelp | ClapKind::DisplayVersion | ClapKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            CliError::Help(e.render().to_string())
        }
        _ => CliError::Usage(e.render().to_string()),
    })?;
    let (command, sub) = matches.subcommand().expect("subcommand is required");
    let file = match sub.get_one::<String>("config") {
        Some(path) => {
            let path = Path::new(path);
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            parse_config_text(&text)?
        }
        None => Vec::new(),
    };
    let flags: Vec<(String, String)> = keys(command)
        .unwrap()
        .iter()
        .filter_map(|k| sub.get_one::<String>(k.name).map(|v| (k.name.to_string(), v.clone())))
        .collect();
    resolve(command, &file, &flags)
}

impl RunConfig {
    pub fn str(&self, key: &str) -> &str {
        self.values.get(key).map(|s| s.trim()).unwrap_or_else(|| panic!("key `{key}` is not in the table"))
    }

    fn expr(&self, key: &str, b: Option<f64>) -> CliResult<f64> {
        let v = self.str(key);
        expr::eval(v, b).map_err(|e| cfg_err(key, v, e))
    }

    pub fn real(&self, key: &str) -> CliResult<f64> {
        self.expr(key, None)
    }

    /// Value of an energy key, with `B` bound to the command's field.
    pub fn energy(&self, key: &str) -> CliResult<f64> {
        let b = self.real("B")?;
        self.expr(key, Some(b))
    }

    pub fn int(&self, key: &str) -> CliResult<u64> {
        let v = self.str(key);
        v.parse().map_err(|_| cfg_err(key, v, "not a non-negative integer"))
    }

    pub fn usize(&self, key: &str) -> CliResult<usize> {
        let n = self.int(key)?;
        usize::try_from(n).map_err(|_| cfg_err(key, self.str(key), "too large"))
    }

    pub fn u32(&self, key: &str) -> CliResult<u32> {
        let n = self.int(key)?;
        u32::try_from(n).map_err(|_| cfg_err(key, self.str(key), "too large"))
    }

    pub fn flag(&self, key: &str) -> bool {
        self.str(key) == "true"
    }

    pub fn list(&self, key: &str) -> CliResult<Vec<f64>> {
        let v = self.str(key);
        v.split(',').map(|p| expr::eval(p, None).map_err(|e| cfg_err(key, v, e))).collect()
    }

    /// `None` for `auto`.
    pub fn pair(&self, key: &str) -> CliResult<Option<[f64; 2]>> {
        if self.str(key) == "auto" {
            return Ok(None);
        }
        let l = self.list(key)?;
        match l.as_slice() {
            [a, b] => Ok(Some([*a, *b])),
            _ => Err(cfg_err(key, self.str(key), "expected two values a,b")),
        }
    }

    /// `None` for `auto`.
    pub fn rho(&self, key: &str) -> CliResult<Option<f64>> {
        if self.str(key) == "auto" {
            Ok(None)
        } else {
            self.real(key).map(Some)
        }
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        let v = self.str(key);
        (!v.is_empty()).then(|| PathBuf::from(v))
    }

    pub fn rationals(&self, key: &str) -> CliResult<[BigRational; 3]> {
        parse_rationals(self.str(key)).map_err(|e| cfg_err(key, self.str(key), e))
    }

    pub fn seed(&self) -> u64 {
        self.int("seed").unwrap_or(0)
    }

    pub fn out_dir(&self) -> Option<PathBuf> {
        self.path("out")
    }

    pub fn workers(&self) -> usize {
        self.usize("workers").unwrap_or(1)
    }

    /// The resolved configuration in config-file syntax, keys in table
    /// order.
    pub fn manifest(&self) -> String {
        let mut s = format!("# magbern {}\ncommand = {}\n", env!("CARGO_PKG_VERSION"), self.command);
        for k in keys(&self.command).unwrap() {
            s.push_str(&format!("{} = {}\n", k.name, self.values[k.name]));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        std::iter::once("magbern").chain(s.split_whitespace()).map(String::from).collect()
    }

    #[test]
    fn flags_and_defaults() {
        let c = parse_config(argv("fm --m 6")).unwrap();
        assert_eq!(c.command, "fm");
        assert_eq!(c.int("m").unwrap(), 6);
        assert_eq!(c.seed(), 0);
        let c = parse_config(argv("fm")).unwrap();
        assert_eq!(c.int("m").unwrap(), 2);
    }

    #[test]
    fn flag_beats_file() {
        let file = parse_config_text("# comment\nm = 3   # trailing\n\n").unwrap();
        let c = resolve("fm", &file, &[]).unwrap();
        assert_eq!(c.int("m").unwrap(), 3);
        let c = resolve("fm", &file, &[("m".into(), "6".into())]).unwrap();
        assert_eq!(c.int("m").unwrap(), 6);
    }

    #[test]
    fn errors_name_the_token() {
        let e = parse_config(argv("specineq --rho 1.5")).unwrap_err();
        assert!(e.to_string().contains("rho") && e.to_string().contains("1.5"), "{e}");
        assert_eq!(e.exit_code(), 2);
        let e = parse_config(argv("fm --mm 6")).unwrap_err();
        assert!(e.to_string().contains("--mm") && e.exit_code() == 2, "{e}");
        let e = parse_config(argv("frobnicate")).unwrap_err();
        assert!(e.to_string().contains("frobnicate") && e.exit_code() == 2, "{e}");
        let e = parse_config(argv("fm --m six")).unwrap_err();
        assert!(e.to_string().contains("six"));
        let e = resolve("fm", &parse_config_text("mm = 1").unwrap(), &[]).unwrap_err();
        assert!(e.to_string().contains("mm"));
        assert!(parse_config_text("m 3").is_err());
        assert!(parse_config_text("m = 3\nm = 4").is_err());
        assert!(resolve("fm", &parse_config_text("command = remez").unwrap(), &[]).is_err());
        assert_eq!(parse_config(argv("--help")).unwrap_err().exit_code(), 0);
    }

    #[test]
    fn typed_values() {
        let c = parse_config(argv("specineq --E 3B --B 2 --l 1.5,2 --rho 0.25")).unwrap();
        assert_eq!(c.energy("E").unwrap(), 6.0);
        assert_eq!(c.pair("l").unwrap(), Some([1.5, 2.0]));
        assert_eq!(c.rho("rho").unwrap(), Some(0.25));
        assert_eq!(parse_config(argv("specineq")).unwrap().pair("l").unwrap(), None);
        let c = parse_config(argv("wegner --B pi/4 --eps 0.01,0.02 --m0 -1")).unwrap();
        assert!((c.real("B").unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert_eq!(c.list("eps").unwrap(), vec![0.01, 0.02]);
        assert_eq!(c.real("m0").unwrap(), -1.0);
        let c = parse_config(argv("weyl-verify --field 1/2,0,-3")).unwrap();
        assert_eq!(c.rationals("field").unwrap()[0], BigRational::new(1.into(), 2.into()));
        assert!(parse_config(argv("weyl-verify --field 1/0,0,1")).is_err());
        assert!(parse_config(argv("thickness --l 8,8")).is_err());
        assert!(parse_config(argv("control --pattern dots")).is_err());
    }

    #[test]
    fn manifest_round_trips() {
        for (name, _, _) in COMMANDS {
            let mut flags = vec![("seed".to_string(), "7".to_string())];
            if *name == "thickness" {
                flags.push(("mask".into(), "m.pbm".into()));
                flags.push(("l".into(), "4,4".into()));
            }
            let c = resolve(name, &[], &flags).unwrap();
            let again = resolve(name, &parse_config_text(&c.manifest()).unwrap(), &[]).unwrap();
            assert_eq!(c, again);
        }
    }
}
