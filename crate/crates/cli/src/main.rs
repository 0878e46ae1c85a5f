//! Command-line front-end: parse expressions, spec files and literals, run
//! the exact computations, and print results as reduced rationals and group
//! tuples.
//!
//! Exit codes: 0 on success, 1 when a probe or check reports violations,
//! 2 on input errors.

mod literals;
mod place;
mod specfile;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num::BigRational;
use serde_json::json;

use abhyankar::expr::parse_to_rf;
use abhyankar::form::{poincare_residue, valuate_form, ResidueForm};
use abhyankar::group::GroupElement;
use abhyankar::logpair::{
    adjunction_identity_check, decompose_discrepancy, different, lct, log_discrepancy,
    probe_global, Divisor, ProbeMode, ProbeReport,
};
use abhyankar::series::{GenSeries, SeriesFrame};
use abhyankar::valuation::Place;

use literals::{parse_form, parse_series};

#[derive(Parser)]
#[command(
    name = "abhyankar",
    version,
    about = "Exact valuations of rational functions and top differential forms, \
             log discrepancies, thresholds and adjunction"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Value of a rational function at a valuation.
    Value {
        /// Valuation spec file.
        #[arg(long)]
        spec: PathBuf,
        /// Expression over the spec's variables.
        #[arg(long)]
        expr: String,
    },
    /// Value of a rational top differential form at a valuation.
    FormValue {
        #[arg(long)]
        spec: PathBuf,
        /// Form literal, e.g. `(1/t) d(t) ^ d(x)`.
        #[arg(long)]
        form: String,
    },
    /// Residue of a value-zero function, or the Poincaré residue of a form.
    Residue {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, conflicts_with = "form", required_unless_present = "form")]
        expr: Option<String>,
        #[arg(long)]
        form: Option<String>,
    },
    /// Log discrepancy of a pair at a valuation.
    Discrepancy {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long)]
        spec: PathBuf,
    },
    /// Log canonical threshold of a divisor at a rank-one valuation.
    Lct {
        #[arg(long)]
        pair: PathBuf,
        /// The divisor `H` as a single function.
        #[arg(long = "H")]
        h_function: String,
        #[arg(long)]
        spec: PathBuf,
    },
    /// Discrepancy decomposition over the basis divisors.
    Decompose {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long)]
        spec: PathBuf,
    },
    /// Adjunction different on the center of an lc place.
    Different {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long)]
        spec: PathBuf,
    },
    /// Check the adjunction identity a(X,D,v∘mu) = a(Z,D_Z,mu).
    AdjunctionCheck {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        /// Spec file of the inner valuation on the residue variables.
        #[arg(long)]
        inner: PathBuf,
    },
    /// Sample random adapted valuations and check klt/lc inequalities.
    Probe {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Arithmetic on finite generalized series.
    Series {
        #[arg(long, value_enum)]
        op: SeriesOp,
        /// Series literal, e.g. `[(0,0): 1, (1,0): -1]`.
        #[arg(long)]
        lhs: String,
        /// Second operand for add/mul.
        #[arg(long)]
        rhs: Option<String>,
        /// Term budget for invert.
        #[arg(long, default_value_t = 16)]
        max_terms: usize,
        /// Exponent cutoff for invert, e.g. `(4)` or `(1, 0)`.
        #[arg(long)]
        cutoff: Option<String>,
        /// Frame names for partial, e.g. `z1,z2`; defaults to z1..zd.
        #[arg(long)]
        frame: Option<String>,
        /// Differentiation direction: a frame name.
        #[arg(long)]
        var: Option<String>,
        /// Composition layout `front,back` for residue.
        #[arg(long)]
        layout: Option<String>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Klt,
    Lc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SeriesOp {
    Value,
    Add,
    Mul,
    Invert,
    Partial,
    Residue,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    let format = cli.format;
    match cli.command {
        Command::Value { spec, expr } => {
            let place = specfile::load_valuation(&spec)?;
            let rf = parse_to_rf(&expr, place.context()).map_err(|e| format!("expr: {e}"))?;
            let value = place.value(&rf).map_err(|e| format!("valuation: {e}"))?;
            emit_value(format, "value", &value);
            Ok(0)
        }
        Command::FormValue { spec, form } => {
            let place = specfile::load_valuation(&spec)?;
            let form = parse_form(&form, place.context())?;
            let value = valuate_form(&form, &place).map_err(|e| format!("forms: {e}"))?;
            emit_value(format, "form-value", &value);
            Ok(0)
        }
        Command::Residue { spec, expr, form } => {
            let place = specfile::load_valuation(&spec)?;
            let adapted = place.as_adapted()?;
            if let Some(expr) = expr {
                let rf =
                    parse_to_rf(&expr, place.context()).map_err(|e| format!("expr: {e}"))?;
                let residue = adapted.residue(&rf).map_err(|e| format!("valuation: {e}"))?;
                match format {
                    Format::Text => println!("{residue}"),
                    Format::Json => println!("{}", json!({ "residue": residue.to_string() })),
                }
            } else {
                let form = parse_form(&form.expect("clap enforces one of expr/form"), place.context())?;
                let residue =
                    poincare_residue(&form, adapted).map_err(|e| format!("forms: {e}"))?;
                emit_residue_form(format, &residue);
            }
            Ok(0)
        }
        Command::Discrepancy { pair, spec } => {
            let pair = specfile::load_pair(&pair)?;
            let place = specfile::load_valuation(&spec)?;
            let a = log_discrepancy(&pair, &place).map_err(|e| format!("logpair: {e}"))?;
            emit_value(format, "discrepancy", &a);
            Ok(0)
        }
        Command::Lct {
            pair,
            h_function,
            spec,
        } => {
            let pair = specfile::load_pair(&pair)?;
            let place = specfile::load_valuation(&spec)?;
            let h_rf = parse_to_rf(&h_function, pair.context())
                .map_err(|e| format!("expr: {e}"))?;
            let h = Divisor::single(BigRational::from_integer(1.into()), h_rf)
                .map_err(|e| format!("logpair: {e}"))?;
            let threshold = lct(&pair, &h, &place).map_err(|e| format!("logpair: {e}"))?;
            match format {
                Format::Text => println!("{threshold}"),
                Format::Json => println!("{}", json!({ "lct": threshold.to_string() })),
            }
            Ok(0)
        }
        Command::Decompose { pair, spec } => {
            let pair = specfile::load_pair(&pair)?;
            let place = specfile::load_valuation(&spec)?;
            let spec = place.as_adapted()?;
            let decomposition =
                decompose_discrepancy(&pair, spec).map_err(|e| format!("logpair: {e}"))?;
            match format {
                Format::Text => {
                    for (name, n) in &decomposition {
                        println!("{name}: {n}");
                    }
                }
                Format::Json => {
                    let items: Vec<_> = decomposition
                        .iter()
                        .map(|(name, n)| {
                            json!({ "variable": name, "coefficient": n.to_string() })
                        })
                        .collect();
                    println!("{}", json!({ "decomposition": items }));
                }
            }
            Ok(0)
        }
        Command::Different { pair, spec } => {
            let pair = specfile::load_pair(&pair)?;
            let place = specfile::load_valuation(&spec)?;
            let spec = place.as_adapted()?;
            let delta = different(&pair, spec).map_err(|e| format!("logpair: {e}"))?;
            match format {
                Format::Text => println!("{delta}"),
                Format::Json => {
                    let items: Vec<_> = delta
                        .components()
                        .iter()
                        .map(|(c, h)| json!({ "coeff": c.to_string(), "function": h.to_string() }))
                        .collect();
                    println!("{}", json!({ "different": items }));
                }
            }
            Ok(0)
        }
        Command::AdjunctionCheck { pair, spec, inner } => {
            let pair = specfile::load_pair(&pair)?;
            let place = specfile::load_valuation(&spec)?;
            let spec = place.as_adapted()?;
            let inner_place = specfile::load_valuation(&inner)?;
            let inner = inner_place.as_adapted()?;
            let report = adjunction_identity_check(&pair, spec, inner)
                .map_err(|e| format!("logpair: {e}"))?;
            match format {
                Format::Text => {
                    println!("composed discrepancy = {}", report.composed_discrepancy);
                    println!("center discrepancy   = {}", report.center_discrepancy);
                    println!("equal: {}", report.equal);
                }
                Format::Json => println!(
                    "{}",
                    json!({
                        "composed": report.composed_discrepancy.to_string(),
                        "center": report.center_discrepancy.to_string(),
                        "equal": report.equal,
                    })
                ),
            }
            Ok(if report.equal { 0 } else { 1 })
        }
        Command::Probe {
            pair,
            mode,
            samples,
            seed,
        } => {
            let pair = specfile::load_pair(&pair)?;
            let mode = match mode {
                Mode::Klt => ProbeMode::Klt,
                Mode::Lc => ProbeMode::Lc,
            };
            let report =
                probe_global(&pair, mode, samples, seed).map_err(|e| format!("logpair: {e}"))?;
            emit_probe(format, &report);
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Series {
            op,
            lhs,
            rhs,
            max_terms,
            cutoff,
            frame,
            var,
            layout,
        } => run_series(format, op, &lhs, rhs.as_deref(), max_terms, cutoff, frame, var, layout),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_series(
    format: Format,
    op: SeriesOp,
    lhs: &str,
    rhs: Option<&str>,
    max_terms: usize,
    cutoff: Option<String>,
    frame: Option<String>,
    var: Option<String>,
    layout: Option<String>,
) -> Result<u8, String> {
    let lhs = parse_series(lhs)?;
    let need_rhs = || -> Result<GenSeries, String> {
        parse_series(rhs.ok_or("this operation needs --rhs")?)
    };
    let result = match op {
        SeriesOp::Value => {
            let value = lhs.value().map_err(|e| format!("series: {e}"))?;
            emit_value(format, "value", &value);
            return Ok(0);
        }
        SeriesOp::Add => lhs.add(&need_rhs()?).map_err(|e| format!("series: {e}"))?,
        SeriesOp::Mul => lhs.mul(&need_rhs()?).map_err(|e| format!("series: {e}"))?,
        SeriesOp::Invert => {
            let cutoff = cutoff
                .map(|c| c.parse::<GroupElement>())
                .transpose()
                .map_err(|e| format!("cutoff: {e}"))?;
            lhs.invert(max_terms, cutoff.as_ref())
                .map_err(|e| format!("series: {e}"))?
        }
        SeriesOp::Partial => {
            let dim = lhs.group().dimension();
            let frame = match frame {
                Some(names) => SeriesFrame::new(
                    names.split(',').map(|s| s.trim().to_string()).collect::<Vec<_>>(),
                ),
                None => SeriesFrame::new(
                    (1..=dim).map(|i| format!("z{i}")).collect::<Vec<_>>(),
                ),
            };
            let var = var.ok_or("partial needs --var with a frame name")?;
            let index = frame
                .names()
                .iter()
                .position(|n| n == &var)
                .ok_or_else(|| format!("{var:?} is not a frame name"))?;
            lhs.formal_partial(&frame, index)
                .map_err(|e| format!("series: {e}"))?
        }
        SeriesOp::Residue => {
            let layout = layout.ok_or("residue needs --layout front,back")?;
            let (front, back) = layout
                .split_once(',')
                .ok_or("layout must be `front,back`")?;
            let front: usize = front.trim().parse().map_err(|e| format!("layout: {e}"))?;
            let back: usize = back.trim().parse().map_err(|e| format!("layout: {e}"))?;
            lhs.residue(abhyankar::group::CompositionLayout::new(front, back))
                .map_err(|e| format!("series: {e}"))?
        }
    };
    match format {
        Format::Text => println!("{result}"),
        Format::Json => {
            let terms: Vec<_> = result
                .terms()
                .iter()
                .map(|(e, c)| json!({ "exponent": e.to_string(), "coefficient": c.to_string() }))
                .collect();
            println!(
                "{}",
                json!({ "terms": terms, "truncated": result.marker().is_some() })
            );
        }
    }
    Ok(0)
}

fn emit_value(format: Format, key: &str, value: &GroupElement) {
    match format {
        Format::Text => println!("{value}"),
        Format::Json => println!("{}", json!({ key: value.to_string() })),
    }
}

fn emit_residue_form(format: Format, residue: &ResidueForm) {
    match format {
        Format::Text => {
            let basis = residue
                .basis()
                .iter()
                .map(|g| format!("d({g})"))
                .collect::<Vec<_>>()
                .join(" ^ ");
            println!("({}) {}", residue.coefficient(), basis);
        }
        Format::Json => {
            let basis: Vec<_> = residue.basis().iter().map(|g| g.to_string()).collect();
            println!(
                "{}",
                json!({
                    "coefficient": residue.coefficient().to_string(),
                    "basis": basis,
                })
            );
        }
    }
}

fn emit_probe(format: Format, report: &ProbeReport) {
    match format {
        Format::Text => print!("{report}"),
        Format::Json => {
            let violations: Vec<_> = report
                .violations
                .iter()
                .map(|v| {
                    json!({
                        "discrepancy": v.discrepancy.to_string(),
                        "valuation": v.spec.to_string(),
                    })
                })
                .collect();
            println!(
                "{}",
                json!({
                    "mode": report.mode.to_string(),
                    "samples": report.samples,
                    "seed": report.seed,
                    "violations": violations,
                })
            );
        }
    }
}
