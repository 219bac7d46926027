mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use piwkb::bsb::{self, BsbOptions};
use piwkb::monodromy::{self, MonodromyOptions};
use piwkb::stokes::{self, SvgOptions, TraceOptions};
use piwkb::{CubicPotential, Error};
use serde_json::json;

use config::Config;

#[derive(Parser, Debug)]
#[command(name = "piwkb", version, about = "Complex WKB analysis of the cubic oscillator")]
struct Cli {
    /// key = value settings; flags override them.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify the Stokes complex of V = 4λ³ − 2aλ − 28b.
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        trace: TraceFlags,
    },
    /// Raw Stokes (or anti-Stokes) polylines.
    Trace {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long)]
        anti_stokes: bool,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        compact: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        trace: TraceFlags,
    },
    /// Solve the Bohr–Sommerfeld–Boutroux lattice n ≤ nmax, m ≤ mmax.
    Poles {
        #[arg(long)]
        nmax: Option<u32>,
        #[arg(long)]
        mmax: Option<u32>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        no_rho: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Stokes multipliers by direct integration.
    Verify {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// WKB column for the first two real poles against the numeric values.
    Table2 {
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Real-orbit constants μ*, a*, b*.
    Constants {
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(clap::Args, Debug)]
struct TraceFlags {
    /// Escape radius in units of 1 + max|λᵢ|.
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    step_factor: Option<f64>,
    #[arg(long)]
    edge_tol: Option<f64>,
    #[arg(long)]
    ambiguity_tol: Option<f64>,
}

impl TraceFlags {
    fn options(&self, cfg: &Config) -> Result<TraceOptions> {
        let d = TraceOptions::default();
        let o = TraceOptions {
            r_max_factor: cfg.pick(self.r_max, "r_max", d.r_max_factor)?,
            step_factor: cfg.pick(self.step_factor, "step_factor", d.step_factor)?,
            edge_tol: cfg.pick(self.edge_tol, "edge_tol", d.edge_tol)?,
            ambiguity_tol: cfg.pick(self.ambiguity_tol, "ambiguity_tol", d.ambiguity_tol)?,
            ..d
        };
        for (name, v) in [
            ("r_max", o.r_max_factor),
            ("step_factor", o.step_factor),
            ("edge_tol", o.edge_tol),
            ("ambiguity_tol", o.ambiguity_tol),
        ] {
            if !(v > 0.0) {
                return Err(Usage(format!("{name} must be positive")).into());
            }
        }
        Ok(o)
    }
}

/// Bad input detected after argument parsing.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// Partial result: something was produced but not everything succeeded.
#[derive(Debug)]
struct Partial(String);

impl std::fmt::Display for Partial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Partial {}

/// Parses `1.5`, `-2+0.3i`, `0.3i`, `-i` or `(re,im)`.
fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        bail!("empty number");
    }
    if let Some(inner) = t.strip_prefix('(').and_then(|x| x.strip_suffix(')')) {
        let (re, im) = inner.split_once(',').ok_or_else(|| anyhow!("expected (re,im), got {s}"))?;
        return Ok(Complex64::new(re.parse()?, im.parse()?));
    }
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return Ok(Complex64::new(t.parse().with_context(|| format!("not a number: {s}"))?, 0.0));
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let mut split = 0;
    for i in (1..bytes.len()).rev() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            split = i;
            break;
        }
    }
    let (re, im) = body.split_at(split);
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse().with_context(|| format!("not a number: {s}"))?,
    };
    let re = if re.is_empty() {
        0.0
    } else {
        re.parse().with_context(|| format!("not a number: {s}"))?
    };
    Ok(Complex64::new(re, im))
}

fn potential(a: &str, b: &str) -> Result<CubicPotential> {
    let pa = parse_complex(a).map_err(|e| Usage(format!("--a: {e}")))?;
    let pb = parse_complex(b).map_err(|e| Usage(format!("--b: {e}")))?;
    Ok(CubicPotential::new(pa, pb))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn sig4(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    let digits = 3 - x.abs().log10().floor() as i32;
    format!("{:.*}", digits.max(0) as usize, x)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p).map_err(|e| Usage(e.to_string()))?,
        None => Config::default(),
    };
    match cli.command {
        Command::Classify { a, b, svg, out, trace } => {
            let p = potential(&a, &b)?;
            let opts = trace.options(&cfg)?;
            let g = stokes::classify(&p, &opts)?;
            let mut js = g.to_json();
            js["a"] = json!([p.a.re, p.a.im]);
            js["b"] = json!([p.b.re, p.b.im]);
            write_or_print(out.as_deref(), &serde_json::to_string_pretty(&js)?)?;
            if let Some(path) = svg {
                let title = format!("a = {}, b = {}, class ({})", p.a, p.b, g.class_code);
                fs::write(&path, stokes::to_svg(&g.trace, &title, &SvgOptions::default()))?;
            }
            eprintln!("class ({}) shift {}", g.class_code, g.decoration_shift);
        }
        Command::Trace {
            a,
            b,
            anti_stokes,
            svg,
            compact,
            out,
            trace,
        } => {
            let p = potential(&a, &b)?;
            let opts = TraceOptions {
                anti_stokes,
                ..trace.options(&cfg)?
            };
            let tr = stokes::trace_stokes_lines(&p, &opts)?;
            write_or_print(out.as_deref(), &serde_json::to_string(&tr)?)?;
            if let Some(path) = svg {
                let title = format!("a = {}, b = {}", p.a, p.b);
                let so = SvgOptions {
                    compactified: compact,
                    ..Default::default()
                };
                fs::write(&path, stokes::to_svg(&tr, &title, &so))?;
            }
        }
        Command::Poles {
            nmax,
            mmax,
            tol,
            no_rho,
            out,
            json,
        } => {
            let nmax = cfg.pick(nmax, "nmax", 2)?;
            let mmax = cfg.pick(mmax, "mmax", nmax)?;
            let tol = cfg.pick(tol, "tol", 1e-10)?;
            if nmax == 0 || mmax == 0 || !(tol > 0.0) {
                return Err(Usage("lattice bounds must be ≥ 1 and tol positive".into()).into());
            }
            let opts = BsbOptions {
                tol,
                compute_rho: !no_rho,
                ..Default::default()
            };
            let orbit = bsb::real_orbit_constants(1e-13)?;
            let cells = bsb::solve_lattice(&orbit, nmax, mmax, &opts);
            write_or_print(out.as_deref(), &bsb::lattice_csv(&cells))?;
            if let Some(path) = json {
                fs::write(&path, serde_json::to_string_pretty(&cells)?)?;
            }
            let failed: Vec<String> = cells
                .iter()
                .filter_map(|c| c.error.as_ref().map(|e| format!("({},{}): {e}", c.index.n, c.index.m)))
                .collect();
            if let Some(m) = bsb::min_abs_arg(&cells) {
                eprintln!(
                    "min |arg a| = {m:.6} (4π/5 = {:.6}); {} of {} cells solved",
                    0.8 * std::f64::consts::PI,
                    cells.len() - failed.len(),
                    cells.len()
                );
            }
            if !failed.is_empty() {
                for f in &failed {
                    eprintln!("failed {f}");
                }
                return Err(Partial(format!("{} cells failed", failed.len())).into());
            }
        }
        Command::Verify {
            a,
            b,
            radius,
            threshold,
            out,
        } => {
            let p = potential(&a, &b)?;
            let d = MonodromyOptions::default();
            let opts = MonodromyOptions {
                radius: cfg.pick_opt(radius, "radius")?,
                series_tol: cfg.pick(None, "series_tol", d.series_tol)?,
                taylor_order: cfg.pick(None, "taylor_order", d.taylor_order)?,
                step_scale: cfg.pick(None, "step_scale", d.step_scale)?,
            };
            let threshold = cfg.pick(threshold, "threshold", 0.1)?;
            let s = monodromy::stokes_multipliers(&p, &opts)?;
            let rep = monodromy::report(&p, &s);
            let t = monodromy::tritronquee_test(&s, threshold);
            let mut js = serde_json::to_value(&rep)?;
            js["max_admissibility_residual"] = json!(s.max_admissibility_residual());
            js["max_relative_admissibility_residual"] = json!(s.max_relative_admissibility_residual());
            js["tritronquee"] = json!(t.passed);
            write_or_print(out.as_deref(), &serde_json::to_string_pretty(&js)?)?;
        }
        Command::Table2 { tol } => {
            let tol = cfg.pick(tol, "tol", 1e-10)?;
            let orbit = bsb::real_orbit_constants(1e-13)?;
            let opts = BsbOptions {
                tol,
                compute_rho: false,
                ..Default::default()
            };
            let poles = bsb::real_poles(&orbit, 2);
            let mut sols = vec![];
            for (n, (a, b)) in poles.iter().enumerate() {
                let idx = bsb::BsbIndex::new(n as u32 + 1, n as u32 + 1)?;
                sols.push(bsb::solve_bsb(idx, &CubicPotential::real(*a, *b), &opts)?);
            }
            let mu = |s: &bsb::BsbSolution| (s.a.powi(3) / s.b.powi(2)).re;
            let rows: [(&str, f64, Option<f64>, Option<f64>); 6] = [
                ("a1", sols[0].a.re, Some(-2.38), Some(1.5)),
                ("b1", sols[0].b.re, Some(-0.062), Some(2.0)),
                ("mu1", mu(&sols[0]), Some(-3510.0), Some(10.0)),
                ("a2", sols[1].a.re, Some(-5.66), Some(0.2)),
                ("b2", sols[1].b.re, None, None),
                ("mu2", mu(&sols[1]), None, None),
            ];
            println!("{:<5} {:>10} {:>10} {:>8} {:>8}", "", "WKB", "numeric", "err %", "ref %");
            for (name, wkb, num, reported) in rows {
                let err = num.map(|n| 100.0 * ((wkb - n) / n).abs());
                let f = |x: Option<f64>| x.map(sig4).unwrap_or_else(|| "-".into());
                println!("{:<5} {:>10} {:>10} {:>8} {:>8}", name, sig4(wkb), f(num), f(err), f(reported));
            }
        }
        Command::Constants { tol } => {
            let tol = cfg.pick(tol, "tol", 1e-13)?;
            let o = bsb::real_orbit_constants(tol)?;
            println!("mu_star = {}", o.mu_star);
            println!("a_star = {}", o.a_star);
            println!("b_star = {}", o.b_star);
        }
    }
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        return 1;
    }
    if e.downcast_ref::<Partial>().is_some() {
        return 2;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::AmbiguousClass { .. }) | Some(Error::UnresolvedStokesLine { .. }) => 2,
        Some(Error::InvalidArgument(_)) => 1,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
