//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;

use crate::ammann::{build_pattern, generic_pattern, projection_for, AmmannPattern, AmmannSpec, Symmetry, Window};
use crate::dual::{self, Options};
use crate::error::{Error, Result};
use crate::exactfield::{parse_rational, rational_string, Rational};
use crate::io::{circumscribed_radius, pattern_svg, tiling_svg, BoxWindow, PatternDoc, Style, TilingDoc};
use crate::quasilattice1d::RowId;
use crate::rootsystems::{build_root_system, coxeter_number, coxeter_projection, enumerate_coxeter_pairs, quadratic_pair, SystemName};
use crate::spacegroup;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "QUASIAMMANN_OUT_DIR";

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;
pub const EXIT_IO: i32 = 4;

const EXAMPLES: &str = "\
Examples (the six minimal planar cases):
  quasiammann ammann    --symmetry 10 --row 1  --window -10:10:-10:10 --q0 random:42 --out p.svg
  quasiammann dualize   --symmetry 8  --row 2a --window 6 --decorate both --out octa
  quasiammann dualize   --symmetry 8  --row 2b --window 6 --decorate ammann
  quasiammann prototiles --symmetry 12 --row 3a --window 6
  quasiammann dualize   --symmetry 12 --row 3b --window 6 --decorate both --out dodeca
  quasiammann wallcheck --symmetry 12 --row 3c --halve
  quasiammann spacegroup --group h4 --trace
Random origins use the ChaCha8 generator seeded with the given integer.";

#[derive(Parser, Debug)]
#[command(name = "quasiammann", version, about = "Ammann patterns, dual tilings and quasicrystal space groups", after_help = EXAMPLES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Directory for output files without an absolute path.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List Coxeter pairs for I2(n), H3 and H4.
    Pairs {
        #[arg(long, default_value_t = 30)]
        max: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Root count, Coxeter number and projected ring structure of a system.
    Roots {
        /// A4, B4, D6, E8, F4, H3, H4, I2(5), ...
        #[arg(long)]
        system: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Draw an Ammann pattern (SVG, planar only) or list its planes (JSON).
    Ammann {
        #[command(flatten)]
        pattern: PatternArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Dual tiling as JSON, with SVG renderings.
    Dualize {
        #[command(flatten)]
        pattern: PatternArgs,
        #[arg(long, value_enum, default_value_t = Decorate::None)]
        decorate: Decorate,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        chiral: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Prototile class table.
    Prototiles {
        #[command(flatten)]
        pattern: PatternArgs,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        chiral: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check whether every line is a line of the refined pattern.
    Wallcheck {
        #[command(flatten)]
        pattern: PatternArgs,
        /// Insert midlines first.
        #[arg(long)]
        halve: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Classify space groups of a reflection group.
    Spacegroup {
        /// h4, h3 or i2:<n>.
        #[arg(long, default_value = "h4")]
        group: String,
        /// Print the per-relation constraint lists.
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug, Clone)]
pub struct PatternArgs {
    /// 10, 8, 12, h3 or h4.
    #[arg(long, default_value = "10")]
    pub symmetry: String,
    /// 1, 2a, 2b, 3a, 3b, 3c, 4a, 4b, 4c or 4d; defaults to the first row over the field.
    #[arg(long)]
    pub row: Option<String>,
    /// Disk radius R or box x0:x1:y0:y1.
    #[arg(long, default_value = "8", allow_hyphen_values = true)]
    pub window: String,
    /// Comma-separated rationals, or random:<seed>; defaults to random:<--seed>.
    #[arg(long, allow_hyphen_values = true)]
    pub q0: Option<String>,
    /// Number of inflation steps applied to the origin.
    #[arg(long, default_value_t = 0)]
    pub inflate: u32,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Svg)]
    pub format: Format,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Svg,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decorate {
    None,
    Ammann,
    Inflation,
    Both,
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        e if e.is_validation() => EXIT_VALIDATION,
        _ => EXIT_COMPUTATION,
    }
}

/// A parsed window: the disk used for computation and the box used for drawing.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowArg {
    pub disk: Window,
    pub clip: BoxWindow,
}

pub fn parse_window(s: &str) -> Result<WindowArg> {
    let bad = || Error::Invalid(format!("window '{}' is not R or x0:x1:y0:y1", s));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => {
            let r = parse_rational(parts[0]).ok_or_else(bad)?;
            if r <= Rational::from_integer(0.into()) {
                return Err(Error::Invalid("window radius must be positive".into()));
            }
            let f = r.to_f64().unwrap_or(f64::NAN);
            Ok(WindowArg { disk: Window::new(r), clip: [-f, f, -f, f] })
        }
        4 => {
            let v: Vec<f64> = parts
                .iter()
                .map(|p| parse_rational(p).map(|r| r.to_f64().unwrap_or(f64::NAN)))
                .collect::<Option<_>>()
                .ok_or_else(bad)?;
            if v[0] >= v[1] || v[2] >= v[3] {
                return Err(Error::Invalid("window box must have x0 < x1 and y0 < y1".into()));
            }
            let clip = [v[0], v[1], v[2], v[3]];
            Ok(WindowArg { disk: Window::new(circumscribed_radius(&clip)), clip })
        }
        _ => Err(bad()),
    }
}

/// Origin choice from `--q0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Q0Arg {
    Exact(Vec<Rational>),
    Random(u64),
}

pub fn parse_q0(s: &str) -> Result<Q0Arg> {
    if let Some(seed) = s.trim().strip_prefix("random:") {
        return seed.trim().parse().map(Q0Arg::Random).map_err(|_| Error::Invalid(format!("bad seed in '{}'", s)));
    }
    s.split(',')
        .map(|p| parse_rational(p).ok_or_else(|| Error::Invalid(format!("'{}' is not a rational", p))))
        .collect::<Result<Vec<_>>>()
        .map(Q0Arg::Exact)
}

fn parse_symmetry(s: &str) -> Result<Symmetry> {
    s.parse()
}

fn row_for(sym: Symmetry, row: &Option<String>) -> Result<RowId> {
    match row {
        Some(r) => r.parse(),
        None => Ok(sym.rows()[0]),
    }
}

/// Builds the pattern named by the flags; returns it with the disk window.
pub fn build_from_args(args: &PatternArgs, seed: u64, log: &mut dyn Write) -> Result<(AmmannPattern, WindowArg)> {
    let sym = parse_symmetry(&args.symmetry)?;
    let row = row_for(sym, &args.row)?;
    let window = parse_window(&args.window)?;
    let q0 = match &args.q0 {
        Some(s) => parse_q0(s)?,
        None => Q0Arg::Random(seed),
    };
    let mut pattern = match q0 {
        Q0Arg::Random(s) => {
            let (p, used) = generic_pattern(sym, row, s, &window.disk)?;
            if used != s {
                writeln!(log, "seed {} gives a singular origin; using seed {}", s, used)?;
            }
            p
        }
        Q0Arg::Exact(mut v) => {
            let proj = projection_for(sym)?;
            if v.len() == 1 && v[0] == Rational::from_integer(0.into()) {
                v = vec![v[0].clone(); proj.ambient_dim()];
            }
            build_pattern(&AmmannSpec::with_projection(sym, proj, row, Some(&v))?)?
        }
    };
    for _ in 0..args.inflate {
        pattern = pattern.inflate()?;
    }
    Ok((pattern, window))
}

fn resolve(out_dir: &Option<PathBuf>, out: &Option<PathBuf>, default: &str) -> PathBuf {
    let p = out.clone().unwrap_or_else(|| PathBuf::from(default));
    match out_dir {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p,
    }
}

fn write_file(path: &Path, content: &str, log: &mut dyn Write) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, content)?;
    writeln!(log, "wrote {}", path.display())?;
    Ok(())
}

/// Writes text to `--out` when given, else to stdout.
fn emit(out_dir: &Option<PathBuf>, output: &OutputArgs, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match &output.out {
        Some(_) => write_file(&resolve(out_dir, &output.out, ""), text, stdout),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

fn with_suffix(base: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "tiling".into());
    base.with_file_name(format!("{}{}.{}", stem, suffix, ext))
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    let out_dir = cli.out_dir;
    match cli.command {
        Command::Pairs { max, output } => {
            let entries = enumerate_coxeter_pairs(max);
            let text = match output.format {
                Format::Json => {
                    let rows: Vec<serde_json::Value> = entries
                        .iter()
                        .map(|e| {
                            serde_json::json!({
                                "theta_par": e.theta_par.to_string(),
                                "theta": e.partner.as_ref().map(|p| p.theta.to_string()),
                                "N": e.partner.as_ref().map(|p| p.degree),
                                "D": e.partner.as_ref().and_then(|p| p.field_d),
                            })
                        })
                        .collect();
                    serde_json::to_string_pretty(&rows).unwrap() + "\n"
                }
                Format::Svg => entries
                    .iter()
                    .map(|e| match &e.partner {
                        Some(p) => format!("{}\n", p),
                        None => format!("{} <-> none\n", e.theta_par),
                    })
                    .collect(),
            };
            emit(&out_dir, &output, &text, stdout)
        }
        Command::Roots { system, output } => {
            let name: SystemName = system.parse()?;
            let rs = build_root_system(name)?;
            let h = if name.is_crystallographic() {
                coxeter_number(&rs)?
            } else {
                match name {
                    SystemName::H3 => 10,
                    SystemName::H4 => 30,
                    SystemName::I2(n) => n,
                    _ => return Err(Error::Unsupported(format!("no Coxeter number for {}", name))),
                }
            };
            let mut text = format!("{}: {} roots, rank {}, Coxeter number {}\n", name, rs.num_roots(), rs.rank, h);
            let partners = enumerate_coxeter_pairs(30).into_iter().filter_map(|e| e.partner).filter(|p| p.theta == name || p.theta_par == name);
            for pair in partners {
                text += &format!("pair: {}\n", pair);
                if pair.degree == 2 {
                    let proj = coxeter_projection(&quadratic_pair(pair.theta_par)?)?;
                    for (r2, n) in proj.ring_structure() {
                        text += &format!("  ring |v|^2 = {}: {} roots\n", r2, n);
                    }
                }
            }
            emit(&out_dir, &output, &text, stdout)
        }
        Command::Ammann { pattern, output } => {
            let (p, window) = build_from_args(&pattern, output.seed, stdout)?;
            let name = format!("ammann-{}-{}", p.symmetry, p.class.row_id);
            match output.format {
                Format::Svg => {
                    let svg = pattern_svg(&p, &window.clip, &Style::default())?;
                    write_file(&resolve(&out_dir, &output.out, &format!("{}.svg", name)), &svg, stdout)
                }
                Format::Json => {
                    let doc = PatternDoc::new(&p, &window.disk)?;
                    write_file(&resolve(&out_dir, &output.out, &format!("{}.json", name)), &doc.to_json(), stdout)
                }
            }
        }
        Command::Dualize { pattern, decorate, chiral, output } => {
            let (p, window) = build_from_args(&pattern, output.seed, stdout)?;
            planar(&p)?;
            let base = resolve(&out_dir, &output.out, &format!("tiling-{}-{}", p.symmetry, p.class.row_id));
            let style = Style::default();
            let (doc, tiling) = if decorate == Decorate::None {
                let t = dual::dualize(&p, &window.disk)?;
                (TilingDoc::from_tiling(&t), t)
            } else {
                let r = dual::prototiles(&p, &window.disk, &Options { chiral })?;
                (TilingDoc::from_report(&r), r.tiling)
            };
            write_file(&with_suffix(&base, "", "json"), &doc.to_json(), stdout)?;
            if output.format == Format::Json {
                return Ok(());
            }
            if matches!(decorate, Decorate::None) {
                return write_file(&with_suffix(&base, "", "svg"), &tiling_svg(&tiling, None, None, &style), stdout);
            }
            if matches!(decorate, Decorate::Ammann | Decorate::Both) {
                let segs = dual::decoration_segments(&tiling, &p)?;
                write_file(&with_suffix(&base, "-ammann", "svg"), &tiling_svg(&tiling, Some(&segs), None, &style), stdout)?;
            }
            if matches!(decorate, Decorate::Inflation | Decorate::Both) {
                let (pieces, _) = dual::inflation_pieces(&tiling, &p)?;
                let flat: Vec<_> = pieces.into_iter().flatten().flatten().collect();
                write_file(&with_suffix(&base, "-inflation", "svg"), &tiling_svg(&tiling, None, Some(&flat), &style), stdout)?;
            }
            Ok(())
        }
        Command::Prototiles { pattern, chiral, output } => {
            let (p, window) = build_from_args(&pattern, output.seed, stdout)?;
            planar(&p)?;
            let r = dual::prototiles(&p, &window.disk, &Options { chiral })?;
            let text = match output.format {
                Format::Json => TilingDoc::from_report(&r).to_json(),
                Format::Svg => class_table(&r),
            };
            emit(&out_dir, &output, &text, stdout)
        }
        Command::Wallcheck { pattern, halve, output } => {
            let (p, window) = build_from_args(&pattern, output.seed, stdout)?;
            let rep = if halve {
                dual::halve_pattern(&p).check_wall_to_wall(&window.disk)?
            } else {
                dual::check_wall_to_wall(&p, &window.disk)?
            };
            let text = format!(
                "{} row {}{}: wall-to-wall {} ({} lines checked, {} violations)\n",
                p.symmetry,
                p.class.row_id,
                if halve { " halved" } else { "" },
                rep.wall_to_wall,
                rep.checked,
                rep.violations.len()
            );
            emit(&out_dir, &output, &text, stdout)
        }
        Command::Spacegroup { group, trace, output } => {
            let p = spacegroup::group(&group)?;
            let text = if trace {
                let pivots = if group.trim().eq_ignore_ascii_case("h4") { spacegroup::h4_pivots() } else { Vec::new() };
                spacegroup::trace(&p, &pivots)?.render()
            } else {
                format!("{}: {}\n", p.name, spacegroup::classify(&p)?)
            };
            emit(&out_dir, &output, &text, stdout)
        }
    }
}

fn planar(p: &AmmannPattern) -> Result<()> {
    if p.symmetry.is_planar() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("tilings need a planar symmetry (10, 8 or 12), got {}", p.symmetry)))
    }
}

/// Text table of prototile classes.
pub fn class_table(r: &dual::PrototileReport) -> String {
    let m = r.tiling.star_size();
    let mut s = format!(
        "{} row {}: {} faces, {} shapes, {} classes, bijection {}\n",
        r.tiling.symmetry,
        r.tiling.row,
        r.tiling.faces.len(),
        r.shape_count(),
        r.classes.len(),
        r.bijection()
    );
    s += "id  angles (units of 360/2J)  count  segments  children\n";
    for c in &r.classes {
        let angles: Vec<String> = dual::shape_angles(&c.shape, m).iter().map(|a| a.to_string()).collect();
        s += &format!(
            "{:<3} {:<25} {:>6} {:>9} {:>9}\n",
            c.id,
            angles.join(","),
            c.count,
            c.decoration.len(),
            c.inflation_patch.len()
        );
    }
    s += &format!("window radius {}\n", rational_string(&r.tiling.window.radius));
    s
}
