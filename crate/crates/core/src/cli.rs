//! Command-line front end.
//!
//! Exit status: 0 on success, 1 for usage and configuration errors, 2 when
//! the input cannot be decoded or carries too little data to estimate from.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::decoder::McuDecoder;
use crate::error::{Error, Result};
use crate::estimator::{EstimationReport, EstimatorOptions, WidthEstimator};
use crate::eval::{collect_jpegs, Evaluator};
use crate::idct::IdctRegistry;
use crate::parser::{parse_stream, strip_dimensions, DecodeContext};
use crate::synth::{generate, ContentClass, DEFAULT_HEIGHTS};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "mcuwidth", version, about = "Estimate the width of baseline JPEG data from its MCU sequence")]
pub struct Cli {
    /// IDCT kernel used for pixel reconstruction.
    #[arg(long, global = true, default_value = IdctRegistry::DEFAULT)]
    pub idct: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateFlags {
    /// Zero the frame width and height before decoding.
    #[arg(long)]
    pub strip: bool,

    /// Ignore candidate widths above this many pixels.
    #[arg(long, value_name = "PX")]
    pub max_width: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the estimated width.
    Estimate {
        /// JPEG file, or `-` for stdin.
        input: PathBuf,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the image reconstructed at the estimated width.
        #[arg(long, value_name = "PATH")]
        emit_image: Option<PathBuf>,
        #[command(flatten)]
        flags: EstimateFlags,
    },
    /// Write the candidate-width histogram as CSV.
    Histogram {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: EstimateFlags,
    },
    /// Lay the decoded MCUs out at a width and write PPM/PGM.
    Reconstruct {
        input: PathBuf,
        /// Width in pixels; a multiple of the MCU width. Defaults to the estimate.
        #[arg(long, value_name = "PX")]
        width: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: EstimateFlags,
    },
    /// Score estimates against header widths over a set of files.
    Eval {
        /// Files or directories of `.jpg`/`.jpeg` files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Print the summary as JSON instead of a table.
        #[arg(long)]
        json: bool,
        /// Also write the JSON summary here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: EstimateFlags,
    },
    /// Generate a seeded synthetic corpus.
    Synth {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Generate the periodic (expected-failure) class.
        #[arg(long)]
        periodic: bool,
        /// Width range as `MIN:MAX`.
        #[arg(long, default_value = "174:500", value_parser = parse_range)]
        widths: (u32, u32),
        /// Height range as `MIN:MAX`.
        #[arg(long, value_parser = parse_range)]
        heights: Option<(u32, u32)>,
    },
    /// Zero the frame width and height and write the result.
    Strip {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_range(s: &str) -> std::result::Result<(u32, u32), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected MIN:MAX, got {s:?}"))?;
    let lo = a.trim().parse::<u32>().map_err(|e| e.to_string())?;
    let hi = b.trim().parse::<u32>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

/// Exit status for a library error.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::WidthNotMultipleOfK { .. }
        | Error::EmptyCorpus
        | Error::InvalidRange(_)
        | Error::UnknownIdct(_)
        | Error::Io(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// payloads to `stdout` and diagnostics to stderr.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        io::stdin().lock().read_to_end(&mut buf)?;
        Ok(buf)
    } else {
        fs::read(path).map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
    }
}

fn write_output(out: Option<&Path>, stdout: &mut dyn Write, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes)?,
        None => stdout.write_all(bytes)?,
    }
    Ok(())
}

struct Pipeline {
    decoder: McuDecoder,
    estimator: WidthEstimator,
}

impl Pipeline {
    fn new(cli: &Cli, flags: &EstimateFlags) -> Result<Self> {
        let idct = IdctRegistry::default().create(&cli.idct)?;
        Ok(Self {
            decoder: McuDecoder::new(idct),
            estimator: WidthEstimator::new(EstimatorOptions {
                max_width: flags.max_width,
                parallel: true,
            }),
        })
    }

    fn load(&self, input: &Path, flags: &EstimateFlags) -> Result<(Vec<u8>, DecodeContext)> {
        let mut bytes = read_input(input)?;
        if flags.strip {
            bytes = strip_dimensions(&bytes)?;
        }
        let ctx = parse_stream(&bytes)?;
        Ok((bytes, ctx))
    }

    fn estimate(&self, bytes: &[u8], ctx: &DecodeContext) -> Result<EstimationReport> {
        let seq = self.decoder.decode_mcus_at(ctx, ctx.scan(bytes), ctx.scan_data.start)?;
        let report = self.estimator.estimate(&seq)?;
        if report.tie_broken {
            log::warn!("tie for the mode broken toward the smallest width {}", report.estimated_width);
        }
        Ok(report)
    }
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    name: &'a str,
    class: ContentClass,
    width: u32,
    height: u32,
    #[serde(rename = "K")]
    k: u32,
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Estimate {
            input,
            json,
            out,
            emit_image,
            flags,
        } => {
            let p = Pipeline::new(cli, flags)?;
            let (bytes, ctx) = p.load(input, flags)?;
            let report = p.estimate(&bytes, &ctx)?;
            if *json {
                writeln!(stdout, "{}", report.to_json())?;
            } else {
                writeln!(stdout, "estimated_width: {}", report.estimated_width)?;
                writeln!(stdout, "mode_frequency: {}", report.mode_frequency)?;
                writeln!(stdout, "n: {}", report.n)?;
                writeln!(stdout, "K: {}", report.mcu_width)?;
                writeln!(stdout, "tie_broken: {}", report.tie_broken)?;
                if let Some(w) = ctx.declared_width {
                    writeln!(stdout, "declared_width: {w}")?;
                }
            }
            if let Some(path) = out {
                fs::write(path, report.to_json() + "\n")?;
            }
            if let Some(path) = emit_image {
                let raster = p
                    .decoder
                    .reconstruct_image(&ctx, ctx.scan(&bytes), report.estimated_width as usize)?;
                fs::write(path, raster.to_pnm_bytes())?;
            }
        }
        Command::Histogram { input, out, flags } => {
            let p = Pipeline::new(cli, flags)?;
            let (bytes, ctx) = p.load(input, flags)?;
            let report = p.estimate(&bytes, &ctx)?;
            write_output(out.as_deref(), stdout, report.histogram_csv().as_bytes())?;
        }
        Command::Reconstruct {
            input,
            width,
            out,
            flags,
        } => {
            let p = Pipeline::new(cli, flags)?;
            let (bytes, ctx) = p.load(input, flags)?;
            let k = ctx.mcu_width() as u32;
            let width = match *width {
                Some(w) if w == 0 || w % k != 0 => return Err(Error::WidthNotMultipleOfK { width: w, k }),
                Some(w) => w,
                None => p.estimate(&bytes, &ctx)?.estimated_width,
            };
            let raster = p.decoder.reconstruct_image(&ctx, ctx.scan(&bytes), width as usize)?;
            write_output(out.as_deref(), stdout, &raster.to_pnm_bytes())?;
        }
        Command::Eval {
            inputs,
            json,
            out,
            flags,
        } => {
            let p = Pipeline::new(cli, flags)?;
            let mut paths = Vec::new();
            for input in inputs {
                if input.is_dir() {
                    paths.extend(collect_jpegs(input)?);
                } else {
                    paths.push(input.clone());
                }
            }
            let evaluator = Evaluator {
                decoder: p.decoder,
                estimator: p.estimator,
                strip: flags.strip,
            };
            let summary = evaluator.evaluate_corpus(&paths)?;
            if *json {
                writeln!(stdout, "{}", summary.to_json())?;
            } else {
                let label = match inputs.as_slice() {
                    [one] if one.is_dir() => one
                        .file_name()
                        .map_or_else(|| one.display().to_string(), |n| n.to_string_lossy().into_owned()),
                    _ => "corpus".to_string(),
                };
                write!(stdout, "{}", summary.to_table(&label))?;
            }
            if let Some(path) = out {
                fs::write(path, summary.to_json() + "\n")?;
            }
        }
        Command::Synth {
            out,
            count,
            seed,
            periodic,
            widths,
            heights,
        } => {
            let class = if *periodic {
                ContentClass::Periodic
            } else {
                ContentClass::Smooth
            };
            let heights = heights.map_or(DEFAULT_HEIGHTS, |(a, b)| a..=b);
            let images = generate(class, *count, widths.0..=widths.1, heights, *seed)?;
            fs::create_dir_all(out)?;
            let mut manifest = Vec::with_capacity(images.len());
            for img in &images {
                fs::write(out.join(&img.name), &img.bytes)?;
                manifest.push(ManifestEntry {
                    name: &img.name,
                    class: img.class,
                    width: img.width,
                    height: img.height,
                    k: img.mcu_width,
                });
            }
            let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
            fs::write(out.join("manifest.json"), json + "\n")?;
            writeln!(stdout, "wrote {} files to {}", images.len(), out.display())?;
        }
        Command::Strip { input, out } => {
            let bytes = read_input(input)?;
            write_output(out.as_deref(), stdout, &strip_dimensions(&bytes)?)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("174:500"), Ok((174, 500)));
        assert!(parse_range("174-500").is_err());
    }

    #[test]
    fn usage_errors() {
        let mut out = Vec::new();
        assert_eq!(run(["mcuwidth", "bogus"], &mut out), EXIT_USAGE);
        assert_eq!(run(["mcuwidth", "estimate"], &mut out), EXIT_USAGE);
        assert_eq!(run(["mcuwidth", "--idct", "nope", "estimate", "x.jpg"], &mut out), EXIT_USAGE);
    }

    #[test]
    fn exit_code_mapping() {
        assert_eq!(exit_code(&Error::EmptyCorpus), EXIT_USAGE);
        assert_eq!(exit_code(&Error::EmptyScan { n: 1 }), EXIT_DATA);
        assert_eq!(exit_code(&Error::CorruptHuffmanStream { offset: 9 }), EXIT_DATA);
    }
}
