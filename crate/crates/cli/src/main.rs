use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use kerrmeter::config::{parse_config, parse_str, Config, PhiSetting};
use kerrmeter::plot::{read_series, render_svg, Axes, Series};
use kerrmeter::sweep::{format_number, run_sweep, write_csv, SweepRow, SweepSpec, SweepVariable};
use kerrmeter::validate::{run_validation, Fault};
use kerrmeter_core::constants::TWO_PI_MHZ;
use kerrmeter_core::device::{default_r_grid, Device, DEFAULT_R_POINTS};
use kerrmeter_core::interferometer::{
    optimal_phi_t, precision_closed_form, precision_numeric, ClosedForm, Estimand,
    InterferometerConfig, MomentSource, PrintedReading, Quadrature,
};
use kerrmeter_core::metrology::{
    force_sensitivity, zero_point_motion, Cantilever, Kilograms, MeterSeconds, RadiansPerSecond,
};

/// Largest n̄ for which `precision` also evaluates the Fock-space oracle.
const ORACLE_REPORT_LIMIT: f64 = 100.0;

#[derive(Parser)]
#[command(
    name = "kerrmeter",
    version,
    about = "Kerr interferometer displacement sensing model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file; defaults apply when omitted
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted)
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also render an SVG plot of the result
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, short)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Phase precision at one point, or over an eta_t / phi_t sweep
    Precision(Common),
    /// Kerr coefficient and its slope versus plate displacement
    EtaCurve(Common),
    /// Displacement precision versus plate displacement
    DisplacementCurve(Common),
    /// Displacement precision versus input photon number
    PhotonSweep(Common),
    /// Force and gravity resolution of the default cantilever
    Gravimeter {
        /// Displacement precision δ(rt) in m/Hz
        #[arg(long, default_value_t = 1e-22)]
        delta_rt: f64,
    },
    /// Mechanical zero-point motion
    Zpm {
        /// Oscillator mass in kg (with --frequency); defaults print the reference cases
        #[arg(long, requires = "frequency")]
        mass: Option<f64>,
        /// Oscillation frequency in Hz
        #[arg(long, requires = "mass")]
        frequency: Option<f64>,
    },
    /// Run the self-check suite and write a report
    Validate {
        /// Report file (stdout when omitted)
        #[arg(long)]
        report: Option<PathBuf>,
        /// Corrupt the model on purpose to exercise the checks
        #[arg(long, value_enum)]
        inject_fault: Option<FaultArg>,
    },
    /// Render columns of a sweep CSV as SVG
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long, required = true, num_args = 1..)]
        y: Vec<String>,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        log_x: bool,
        #[arg(long)]
        log_y: bool,
        #[arg(long, default_value = "")]
        title: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    KerrSign,
}

enum Outcome {
    Done,
    ValidationFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::ValidationFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load(path: Option<&Path>) -> Result<Config> {
    Ok(match path {
        Some(p) => parse_config(p)?,
        None => parse_str("")?,
    })
}

fn output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout()
            .write_all(text.as_bytes())
            .context("writing stdout"),
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Precision(c) => precision(&c),
        Command::EtaCurve(c) => eta_curve(&c),
        Command::DisplacementCurve(c) => sweep_command(&c, SweepVariable::R),
        Command::PhotonSweep(c) => sweep_command(&c, SweepVariable::NBar),
        Command::Gravimeter { delta_rt } => gravimeter(delta_rt),
        Command::Zpm { mass, frequency } => zpm(mass, frequency),
        Command::Validate {
            report,
            inject_fault,
        } => {
            let fault = inject_fault.map(|FaultArg::KerrSign| Fault::KerrSign);
            let report_data = run_validation(fault);
            output(report.as_deref(), &report_data.render())?;
            Ok(if report_data.must_failures() > 0 {
                Outcome::ValidationFailed
            } else {
                Outcome::Done
            })
        }
        Command::Plot {
            input,
            x,
            y,
            out,
            log_x,
            log_y,
            title,
        } => {
            let series = read_series(&input, &x, &y)?;
            let y_label = y.join(", ");
            let axes = Axes {
                title,
                x_label: x,
                y_label,
                x_log: log_x,
                y_log: log_y,
            };
            fs::write(&out, render_svg(&series, &axes)?)?;
            Ok(Outcome::Done)
        }
    }
}

fn report_point_errors(rows: &[SweepRow], variable: SweepVariable) {
    for row in rows {
        if let Some(e) = &row.error {
            eprintln!(
                "warning: {variable} = {}: {e}",
                format_number(Some(row.value))
            );
        }
    }
}

fn sweep_command(c: &Common, variable: SweepVariable) -> Result<Outcome> {
    let cfg = load(c.config.as_deref())?;
    let spec = SweepSpec::from_config(&cfg, variable)?;
    run_and_write(c, &spec)
}

fn run_and_write(c: &Common, spec: &SweepSpec) -> Result<Outcome> {
    let rows = run_sweep(spec, c.jobs)?;
    report_point_errors(&rows, spec.variable);
    let mut buf = Vec::new();
    write_csv(&rows, spec.variable, &mut buf)?;
    output(c.out.as_deref(), std::str::from_utf8(&buf)?)?;
    if let Some(path) = &c.plot {
        plot_rows(&rows, spec.variable, path)?;
    }
    Ok(Outcome::Done)
}

fn plot_rows(rows: &[SweepRow], variable: SweepVariable, path: &Path) -> Result<()> {
    let series = |label: &str, f: &dyn Fn(&SweepRow) -> Option<f64>| Series {
        label: label.to_string(),
        points: rows
            .iter()
            .map(|r| (r.value, f(r).unwrap_or(f64::NAN)))
            .collect(),
    };
    let (series, axes) = match variable {
        SweepVariable::R => (
            vec![
                series("δ(rt) X", &|r| r.delta_rt_x),
                series("δ(rt) Y", &|r| r.delta_rt_y),
            ],
            Axes {
                title: "displacement precision".into(),
                x_label: "r (m)".into(),
                y_label: "δ(rt) (m/Hz)".into(),
                x_log: false,
                y_log: true,
            },
        ),
        SweepVariable::NBar => (
            vec![
                series("δ(rt) X", &|r| r.delta_rt_x),
                series("δ(rt) Y", &|r| r.delta_rt_y),
            ],
            Axes {
                title: "displacement precision".into(),
                x_label: "n̄".into(),
                y_label: "δ(rt) (m/Hz)".into(),
                x_log: true,
                y_log: true,
            },
        ),
        SweepVariable::EtaT => (
            vec![
                series("δ(ηt) X", &|r| r.delta_eta_t_x),
                series("δ(ηt) Y", &|r| r.delta_eta_t_y),
            ],
            Axes {
                title: "Kerr phase precision".into(),
                x_label: "ηt (rad)".into(),
                y_label: "δ(ηt) (rad)".into(),
                x_log: true,
                y_log: true,
            },
        ),
        SweepVariable::PhiT => (
            vec![
                series("δ(ηt) X", &|r| r.delta_eta_t_x),
                series("δ(ηt) Y", &|r| r.delta_eta_t_y),
            ],
            Axes {
                title: "Kerr phase precision".into(),
                x_label: "φt (rad)".into(),
                y_label: "δ(ηt) (rad)".into(),
                x_log: false,
                y_log: true,
            },
        ),
    };
    fs::write(path, render_svg(&series, &axes)?)
        .with_context(|| format!("writing {}", path.display()))
}

fn precision(c: &Common) -> Result<Outcome> {
    let cfg = load(c.config.as_deref())?;
    match cfg.sweep.variable {
        Some(v @ (SweepVariable::EtaT | SweepVariable::PhiT)) => {
            return run_and_write(c, &SweepSpec::from_config(&cfg, v)?);
        }
        Some(v) => bail!("[sweep] variable {v} is not a precision sweep (use eta_t or phi_t)"),
        None => {}
    }
    if c.plot.is_some() {
        bail!("--plot needs a [sweep] section");
    }
    let i = &cfg.interferometer;
    let base = InterferometerConfig::new(i.n_bar)
        .with_theta_t(i.theta_t)
        .with_port(i.port)
        .with_eta_t(i.eta_t_for(i.n_bar));
    base.validate()?;
    let mut text = String::new();
    text.push_str(&format!(
        "n_bar_photons = {}\n",
        format_number(Some(i.n_bar))
    ));
    text.push_str(&format!(
        "eta_t_rad = {}\n",
        format_number(Some(base.eta_t))
    ));
    text.push_str(&format!(
        "theta_t_rad = {}\n",
        format_number(Some(i.theta_t))
    ));
    for q in [Quadrature::X, Quadrature::Y] {
        let name = match q {
            Quadrature::X => "x",
            Quadrature::Y => "y",
        };
        let phi = match i.phi_t {
            PhiSetting::Optimal => optimal_phi_t(&base, q, Estimand::KerrPhase),
            PhiSetting::Fixed(p) => p,
        };
        let cfg_q = base.with_phi_t(phi).with_quadrature(q);
        let h = 1e-3 / (1.0 + cfg_q.kerr_arm_photons());
        let line = |label: &str, v: Option<f64>| {
            format!("delta_eta_t_{name}_{label}_rad = {}\n", format_number(v))
        };
        text.push_str(&format!(
            "phi_t_{name}_rad = {}\n",
            format_number(Some(phi))
        ));
        text.push_str(&line(
            "rederived",
            precision_closed_form(&cfg_q, ClosedForm::Rederived)
                .delta(q)
                .ok(),
        ));
        text.push_str(&line(
            "printed_literal",
            precision_closed_form(&cfg_q, ClosedForm::Printed(PrintedReading::LITERAL))
                .delta(q)
                .ok(),
        ));
        text.push_str(&line(
            "printed_consistent",
            precision_closed_form(&cfg_q, ClosedForm::Printed(PrintedReading::CONSISTENT))
                .delta(q)
                .ok(),
        ));
        text.push_str(&line(
            "numeric",
            precision_numeric(&cfg_q, h, MomentSource::Analytic)
                .ok()
                .and_then(|p| p.delta(q).ok()),
        ));
        if i.n_bar <= ORACLE_REPORT_LIMIT {
            text.push_str(&line(
                "oracle",
                precision_numeric(&cfg_q, h, MomentSource::Oracle)
                    .ok()
                    .and_then(|p| p.delta(q).ok()),
            ));
        }
    }
    output(c.out.as_deref(), &text)?;
    Ok(Outcome::Done)
}

fn eta_curve(c: &Common) -> Result<Outcome> {
    let cfg = load(c.config.as_deref())?;
    let grid = match cfg.sweep.variable {
        None => default_r_grid(DEFAULT_R_POINTS),
        Some(SweepVariable::R) => SweepSpec::from_config(&cfg, SweepVariable::R)?.grid(),
        Some(v) => bail!("[sweep] variable is {v}, but eta-curve sweeps r"),
    };
    let device = Device::new(cfg.geometry, cfg.device);
    let curve = device.eta_curve(&grid)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record([
        "r_m",
        "gap_m",
        "eta_2pi_MHz",
        "eta_over_kappa_ratio",
        "d_eta_dr_2pi_MHz_per_m",
    ])?;
    for k in 0..curve.len() {
        let r = curve.r_grid[k];
        w.write_record([
            format_number(Some(r)),
            format_number(cfg.geometry.gap(r).ok()),
            format_number(Some(curve.eta[k] / TWO_PI_MHZ)),
            format_number(Some(curve.eta_over_kappa[k])),
            format_number(Some(curve.d_eta_dr[k] / TWO_PI_MHZ)),
        ])?;
    }
    let buf = w.into_inner().map_err(|e| anyhow!("{e}"))?;
    output(c.out.as_deref(), std::str::from_utf8(&buf)?)?;
    if let Some(path) = &c.plot {
        let series = Series {
            label: "η/κ".into(),
            points: curve
                .r_grid
                .iter()
                .zip(&curve.eta_over_kappa)
                .map(|(&r, &e)| (r, e))
                .collect(),
        };
        let axes = Axes {
            title: "Kerr nonlinearity".into(),
            x_label: "r (m)".into(),
            y_label: "η/κ".into(),
            x_log: false,
            y_log: false,
        };
        fs::write(path, render_svg(&[series], &axes)?)?;
    }
    Ok(Outcome::Done)
}

fn gravimeter(delta_rt: f64) -> Result<Outcome> {
    let c = Cantilever::default();
    let fs = force_sensitivity(&c, MeterSeconds::new(delta_rt)?)?;
    println!("delta_rt = {}", MeterSeconds::new(delta_rt)?);
    println!("spring_constant = {}", fs.spring_constant);
    println!("sensing_mass = {}", fs.sensing_mass);
    println!("min_force = {}", fs.min_force);
    println!("gravity_resolution = {:.6e} g", fs.gravity_resolution);
    println!("reference_mass_at_1m = {}", fs.reference_mass_at_1m);
    Ok(Outcome::Done)
}

fn zpm(mass: Option<f64>, frequency: Option<f64>) -> Result<Outcome> {
    let x = |m: f64, w: f64| -> Result<String> {
        Ok(zero_point_motion(Kilograms::new(m)?, RadiansPerSecond::new(w)?)?.to_string())
    };
    match (mass, frequency) {
        (Some(m), Some(f)) => println!("x_zpm = {}", x(m, std::f64::consts::TAU * f)?),
        _ => {
            let c = Cantilever::default();
            println!("mirror_10.7kg_1Hz = {}", x(10.7, std::f64::consts::TAU)?);
            println!(
                "cantilever = {} (mass {}, resonance {})",
                x(c.effective_mass().value(), c.resonance().value())?,
                c.effective_mass(),
                c.resonance()
            );
        }
    }
    Ok(Outcome::Done)
}
