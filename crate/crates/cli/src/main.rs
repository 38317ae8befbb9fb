//! Command-line front end: coefficient tables, measure export, verification runs and the
//! Hilbert Eisenstein demo.
//!
//! Exit codes: 0 pass, 1 verification fail, 2 usage error, 3 tail budget infeasible.

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use modsphere::hilbert::{fitted_constants, hilbert_eisenstein, ExponentConvention, QuadField, FIT_POINTS};
use modsphere::measures::{descend_odd, WeilGenerator};
use modsphere::modforms::{form_by_name, Form};
use modsphere::qseries::{parse_rational, QSeries, DEFAULT_HORIZON};
use modsphere::schwartz::{PolyGaussian, RadialPolyGaussian};
use modsphere::verify::{self, Report};
use modsphere::{Error, Phase4};
use num_complex::Complex64;
use num_rational::BigRational;
use serde_json::json;

#[derive(Parser)]
#[command(name = "modsphere", version, about = "Fourier eigenmeasures from modular forms")]
struct Cli {
    /// Truncation horizon in classical exponents `λ = 2m`.
    #[arg(long, global = true, default_value_t = DEFAULT_HORIZON)]
    horizon: f64,
    /// Residual tolerance; tail budgets must stay below a tenth of it.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Comma-separated probe points such as `0.5i,1i,0.3+1.1i`.
    #[arg(long, global = true)]
    grid: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Identity {
    Modular,
    PsfRadial,
    PsfEven,
    PsfOdd,
    Weil,
    Eigen,
}

#[derive(Subcommand)]
enum Command {
    /// Print the expansion coefficients of a form.
    Coeffs {
        #[arg(long)]
        form: String,
        /// Largest classical index `m` to print.
        #[arg(long, default_value_t = 20)]
        limit: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run one of the certification checks and print its report.
    Verify {
        #[arg(value_enum)]
        identity: Identity,
        #[arg(long)]
        form: String,
        /// Test function, `pg:a=<re>[+<im>i],poly=<c0,...>` or `rpg:k=<k>,a=<a>,polyU=<c0,...>`.
        #[arg(long = "testfn")]
        testfns: Vec<String>,
        /// Weil word for `weil`, e.g. `S,t(1),rot(2)`.
        #[arg(long, default_value = "S")]
        word: String,
        /// Claimed eigenvalue exponent ε (`μ̂ = i^ε μ`) for `eigen`; defaults to the law's.
        #[arg(long)]
        eps: Option<i64>,
        /// Check the odd descent of the measure instead (`eigen` only).
        #[arg(long)]
        descend: bool,
    },
    /// Write the measure attached to a form.
    Measure {
        #[arg(long)]
        form: String,
        /// Sphere dimension; must be twice the weight.
        #[arg(long)]
        dims: Option<u32>,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Fit the constant term of the Hilbert Eisenstein series.
    Hilbert {
        #[arg(long, default_value_t = 5)]
        disc: u64,
        #[arg(long, default_value_t = 2)]
        weight: u32,
        #[arg(long = "trace-bound", default_value_t = 40)]
        trace_bound: u64,
    },
}

enum Failure {
    Usage(String),
    Truncation(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Truncation { .. } => Failure::Truncation(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn parse_complex(s: &str) -> Result<Complex64, Failure> {
    let s = s.trim().replace(' ', "");
    let bad = || usage(format!("cannot read {s:?} as a complex number"));
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|x| Complex64::new(x, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent
    let cut = body
        .char_indices()
        .filter(|&(i, c)| i > 0 && (c == '+' || c == '-') && !body[..i].ends_with(['e', 'E']))
        .map(|(i, _)| i)
        .next_back();
    let (re, im) = match cut {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    Ok(Complex64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?))
}

fn parse_list(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| usage(format!("bad number {x:?}")))).collect()
}

/// Splits `key=value,...,last=<list>` where the last key takes the rest of the string.
fn spec_fields<'a>(body: &'a str, list_key: &str) -> Result<(Vec<(&'a str, &'a str)>, &'a str), Failure> {
    let marker = format!("{list_key}=");
    let at = body.find(&marker).ok_or_else(|| usage(format!("test function needs {marker}")))?;
    let head = body[..at].trim_end_matches(',');
    let fields = head
        .split(',')
        .filter(|p| !p.is_empty())
        .map(|p| p.split_once('=').ok_or_else(|| usage(format!("expected key=value, got {p:?}"))))
        .collect::<Result<_, _>>()?;
    Ok((fields, &body[at + marker.len()..]))
}

fn parse_pg(spec: &str) -> Result<PolyGaussian, Failure> {
    let body = spec.strip_prefix("pg:").ok_or_else(|| usage(format!("expected pg:..., got {spec:?}")))?;
    let (fields, poly) = spec_fields(body, "poly")?;
    let a = fields.iter().find(|(k, _)| *k == "a").ok_or_else(|| usage("pg needs a="))?.1;
    let poly = parse_list(poly)?.into_iter().map(|c| Complex64::new(c, 0.0)).collect();
    Ok(PolyGaussian::new(poly, parse_complex(a)?)?)
}

fn parse_rpg(spec: &str) -> Result<RadialPolyGaussian, Failure> {
    let body = spec.strip_prefix("rpg:").ok_or_else(|| usage(format!("expected rpg:..., got {spec:?}")))?;
    let (fields, poly) = spec_fields(body, "polyU")?;
    let get = |key: &str| fields.iter().find(|(k, _)| *k == key).map(|(_, v)| *v).ok_or_else(|| usage(format!("rpg needs {key}=")));
    let k: u32 = get("k")?.parse().map_err(|_| usage("bad k"))?;
    let poly = parse_list(poly)?.into_iter().map(|c| Complex64::new(c, 0.0)).collect();
    Ok(RadialPolyGaussian::new(k, poly, parse_complex(get("a")?)?)?)
}

fn parse_word(s: &str) -> Result<Vec<WeilGenerator>, Failure> {
    let arg = |x: &str, pre: &str| -> Result<BigRational, Failure> {
        let inner = x.strip_prefix(pre).and_then(|r| r.strip_suffix(')')).ok_or_else(|| usage(format!("bad generator {x:?}")))?;
        parse_rational(inner).map_err(Failure::from)
    };
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| match x {
            "S" => Ok(WeilGenerator::S),
            _ if x.starts_with("t(") => Ok(WeilGenerator::T(arg(x, "t(")?)),
            _ if x.starts_with("rot(") => Ok(WeilGenerator::Rot(arg(x, "rot(")?)),
            _ => Err(usage(format!("unknown generator {x:?}"))),
        })
        .collect()
}

fn grid(cli: &Cli) -> Result<Vec<Complex64>, Failure> {
    match &cli.grid {
        None => Ok(verify::default_grid()),
        Some(g) => g.split(',').map(parse_complex).collect(),
    }
}

fn load_form(name: &str, horizon: f64) -> Result<Form, Failure> {
    form_by_name(name, horizon).map_err(|e| usage(format!("{e}\nknown forms: theta^k, delta, E6, etaprod:{{d:r,...}}, frickeE:N=..,k2=..,sign=+|-")))
}

fn classical_m(e: &modsphere::qseries::Exponent) -> String {
    if e.is_rational() {
        (e.rational_part() / BigRational::from_integer(2.into())).to_string()
    } else {
        format!("({e})/2")
    }
}

fn cmd_coeffs(cli: &Cli, form: &str, limit: u64, format: Format) -> Result<String, Failure> {
    let horizon = cli.horizon.max(2.0 * limit as f64);
    let f = load_form(form, horizon)?;
    let cap = 2.0 * limit as f64 + 1e-9;
    let terms: Vec<_> = f.series.terms().iter().filter(|(e, _)| e.to_f64() <= cap).cloned().collect();
    Ok(match format {
        Format::Csv => {
            let body = QSeries::finite(terms.clone())?.to_csv()?;
            let mut lines = body.lines();
            let mut out = format!("m,{}\n", lines.next().unwrap_or_default());
            for ((e, _), line) in terms.iter().zip(lines) {
                out += &format!("{},{line}\n", classical_m(e));
            }
            out
        }
        Format::Json => {
            let rows: Vec<_> = terms
                .iter()
                .map(|(e, c)| {
                    let (re, im) = c.component_strings();
                    json!({ "m": classical_m(e), "lambda": e.to_string(), "re": re, "im": im })
                })
                .collect();
            serde_json::to_string_pretty(&json!({ "form": form, "limit": limit, "terms": rows })).expect("plain data") + "\n"
        }
    })
}

fn cmd_verify(
    cli: &Cli,
    identity: Identity,
    form: &str,
    testfns: &[String],
    word: &str,
    eps: Option<i64>,
    descend: bool,
) -> Result<Report, Failure> {
    let f = load_form(form, cli.horizon)?;
    let tol = cli.tol;
    let law = || f.law().map_err(Failure::from);
    let pgs = |defaults: &[&str]| -> Result<Vec<PolyGaussian>, Failure> {
        if testfns.is_empty() {
            defaults.iter().map(|s| parse_pg(s)).collect()
        } else {
            testfns.iter().map(|s| parse_pg(s)).collect()
        }
    };
    Ok(match identity {
        Identity::Modular => verify::check_modular_transform(&f.series, law()?, &grid(cli)?, tol)?,
        Identity::PsfRadial => {
            let k = law()?.k() as u32;
            let fns: Vec<RadialPolyGaussian> = if testfns.is_empty() {
                vec![RadialPolyGaussian::real(k, &[1.0], 1.3)?, RadialPolyGaussian::real(k, &[0.0, 1.0], 2.0)?]
            } else {
                testfns.iter().map(|s| parse_rpg(s)).collect::<Result<_, _>>()?
            };
            verify::check_psf_radial(&f.series, law()?, k, &fns, tol)?
        }
        Identity::PsfEven => verify::check_psf_even(&f.series, law()?, &pgs(&["pg:a=2,poly=1", "pg:a=3,poly=0,0,1"])?, tol)?,
        Identity::PsfOdd => verify::check_psf_odd(&f.series, law()?, &pgs(&["pg:a=2,poly=0,1"])?, tol)?,
        Identity::Weil => verify::check_weil_equivariance(&f.measure()?, &parse_word(word)?, &grid(cli)?, tol)?,
        Identity::Eigen => {
            let mu = f.measure()?;
            if descend {
                let (nu, _) = descend_odd(&mu)?;
                let e = match eps {
                    Some(e) => Phase4::new(e),
                    None => nu.eigen().ok_or_else(|| usage("descended measure has no eigen tag; pass --eps"))?,
                };
                verify::check_eigen_line(&nu, e, &pgs(&["pg:a=2,poly=0,1", "pg:a=0.7,poly=0,1,0,2"])?, tol)?
            } else {
                let e = match eps {
                    Some(e) => Phase4::new(e),
                    None => mu.eigen().ok_or_else(|| usage("measure has no eigen tag; pass --eps"))?,
                };
                verify::check_eigen_spherical(&mu, e, &grid(cli)?, tol)?
            }
        }
    })
}

fn cmd_measure(cli: &Cli, form: &str, dims: Option<u32>, format: Format) -> Result<String, Failure> {
    let f = load_form(form, cli.horizon)?;
    let k = f.law()?.k();
    if let Some(d) = dims {
        if d as i64 != k {
            return Err(usage(format!("--dims {d} does not match twice the weight of {form} ({k})")));
        }
    }
    let mu = f.measure()?;
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(&mu.to_json()).expect("plain data") + "\n",
        Format::Csv => f.rescaled_series()?.to_csv()?,
    })
}

fn cmd_hilbert(cli: &Cli, disc: u64, weight: u32, trace_bound: u64) -> Result<(serde_json::Value, bool), Failure> {
    let field = QuadField::new(disc)?;
    let t = BigRational::from_integer(trace_bound.into());
    let h = hilbert_eisenstein(&field, weight, &t)?;
    let (sq1, sq2) = fitted_constants(&field, weight, &t, ExponentConvention::TraceOfSquare)?;
    let point = |p: [Complex64; 2]| format!("({}i, {}i)", p[0].im, p[1].im);
    let mut report = json!({
        "D": disc,
        "k": weight,
        "trace_bound": trace_bound,
        "fitted_constant": h.fitted_constant,
        "residuals": [
            { "probe": format!("fit stability {} vs {}", point(FIT_POINTS[0]), point(FIT_POINTS[1])), "residual": (h.fitted_constant - h.check_constant).abs() },
            { "probe": format!("transformation at {}", point(FIT_POINTS[1])), "residual": h.residual },
        ],
        "square_exponent_fits": [sq1, sq2],
    });
    let mut ok = h.residual <= cli.tol.max(1e-6) && (h.fitted_constant - h.check_constant).abs() <= cli.tol.max(1e-8);
    if disc == 5 && weight == 2 {
        report["reference"] = json!(1.0 / 30.0);
        ok &= (h.fitted_constant - 1.0 / 30.0).abs() < 1e-6;
    }
    Ok((report, ok))
}

fn write_out(out: &Option<std::path::PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    if !(cli.tol > 0.0) || !(cli.horizon > 0.0) {
        return Err(usage("--tol and --horizon must be positive"));
    }
    match &cli.command {
        Command::Coeffs { form, limit, format } => {
            print!("{}", cmd_coeffs(cli, form, *limit, *format)?);
            Ok(true)
        }
        Command::Verify { identity, form, testfns, word, eps, descend } => {
            let r = cmd_verify(cli, *identity, form, testfns, word, *eps, *descend)?;
            println!("{}", r.to_json());
            Ok(r.passed())
        }
        Command::Measure { form, dims, out, format } => {
            write_out(out, &cmd_measure(cli, form, *dims, *format)?)?;
            Ok(true)
        }
        Command::Hilbert { disc, weight, trace_bound } => {
            let (report, ok) = cmd_hilbert(cli, *disc, *weight, *trace_bound)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("plain data"));
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            eprintln!("run `modsphere --help` for usage");
            ExitCode::from(2)
        }
        Err(Failure::Truncation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
