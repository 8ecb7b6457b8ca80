//! `voxsr` command-line driver.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use voxsr_core::io::{
    load_ply, load_voxf, read_manifest, read_voxt, write_ply, write_voxf, write_voxt, PlyFormat,
};
use voxsr_core::metrics::format_db;
use voxsr_core::{
    d1_psnr, downsample, gop_simulate, naive_upsample, octree, projection_psnr, super_resolve,
    voxelize, BBox, Error, GopPattern, MatchParams, PointCloud,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

/// Environment variable capping the worker thread count.
pub const WORKERS_ENV: &str = "VOXSR_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "voxsr", version, about = "Voxelized point-cloud super-resolution toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Quantize a PLY point cloud into a VOXF frame
    Voxelize {
        input: PathBuf,
        #[arg(long, default_value_t = 9)]
        depth: u8,
        /// Bounding cube as `min_x,min_y,min_z,edge` (default: the cloud's own cube)
        #[arg(long, value_parser = parse_bbox)]
        bbox: Option<BBox>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Drop one level of detail
    Downsample {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Naive upsampling: every voxel becomes all 8 children
    Upsample {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Infer one level of detail from full-resolution reference frames
    Superres {
        input: PathBuf,
        /// Full-resolution reference frame (repeatable; earlier wins ties)
        #[arg(long = "ref", required = true)]
        refs: Vec<PathBuf>,
        #[arg(long, default_value_t = 4)]
        window: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Octree occupancy streams
    #[command(subcommand)]
    Octree(OctreeCommand),
    /// Compare two frames
    Metric {
        reference: PathBuf,
        test: PathBuf,
        #[arg(long, value_enum, default_value_t = MetricKind::Both)]
        kind: MetricKind,
    },
    /// Mixed-resolution sequence experiment: super-resolution versus naive upsampling
    Gop(GopArgs),
    /// Write a VOXF frame as a PLY cloud of voxel coordinates
    Export {
        input: PathBuf,
        #[arg(long)]
        binary: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum OctreeCommand {
    /// VOXF frame to VOXT stream
    Encode {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// VOXT stream to VOXF frame, optionally only the first LEVELS levels
    Decode {
        input: PathBuf,
        #[arg(long)]
        levels: Option<u8>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct GopArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = 9)]
    depth: u8,
    #[arg(long, default_value_t = 2)]
    period: usize,
    #[arg(long, default_value_t = 4)]
    window: u32,
    #[arg(long)]
    csv: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MetricKind {
    Proj,
    D1,
    Both,
}

fn parse_bbox(s: &str) -> Result<BBox, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}")))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [x, y, z, edge] if *edge > 0.0 => Ok(BBox { min: [*x, *y, *z], edge: *edge }),
        _ => Err("expected min_x,min_y,min_z,edge with edge > 0".into()),
    }
}

/// Writes `bytes` to a sibling temp file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn workers_from_env() -> Result<Option<usize>, String> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{WORKERS_ENV} must be a positive integer, got '{v}'")),
        },
        Err(_) => Ok(None),
    }
}

/// Runs one subcommand. `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let workers = match workers_from_env() {
        Ok(w) => w,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    let result = match workers {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(cli.command, out, err)),
            Err(e) => Err(Error::Parameter(e.to_string())),
        },
        None => execute(cli.command, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DATA
        }
    }
}

fn execute(cmd: Command, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<(), Error> {
    match cmd {
        Command::Voxelize { input, depth, bbox, out: dst } => {
            let mut cloud = load_ply(&input)?;
            if let Some(b) = bbox {
                cloud = cloud.rebox(b)?;
            }
            let frame = voxelize(&cloud, depth)?;
            write_atomic(&dst, &write_voxf(&frame))?;
            writeln!(out, "{} points -> {} voxels at depth {depth}", cloud.len(), frame.len())?;
        }
        Command::Downsample { input, out: dst } => {
            let frame = downsample(&load_voxf(&input)?)?;
            write_atomic(&dst, &write_voxf(&frame))?;
        }
        Command::Upsample { input, out: dst } => {
            let frame = naive_upsample(&load_voxf(&input)?)?;
            write_atomic(&dst, &write_voxf(&frame))?;
        }
        Command::Superres { input, refs, window, out: dst } => {
            let low = load_voxf(&input)?;
            let refs = refs.iter().map(|p| load_voxf(p)).collect::<Result<Vec<_>, _>>()?;
            let frame = super_resolve(&low, &refs, MatchParams { window })?;
            write_atomic(&dst, &write_voxf(&frame))?;
        }
        Command::Octree(OctreeCommand::Encode { input, out: dst }) => {
            let stream = octree::encode(&load_voxf(&input)?)?;
            write_atomic(&dst, &write_voxt(&stream))?;
        }
        Command::Octree(OctreeCommand::Decode { input, levels, out: dst }) => {
            let stream = read_voxt(&std::fs::read(&input)?)?;
            let frame = match levels {
                Some(l) => octree::decode_levels(&stream, l)?,
                None => octree::decode(&stream)?,
            };
            write_atomic(&dst, &write_voxf(&frame))?;
        }
        Command::Metric { reference, test, kind } => {
            let a = load_voxf(&reference)?;
            let b = load_voxf(&test)?;
            if matches!(kind, MetricKind::Proj | MetricKind::Both) {
                let report = projection_psnr(&a, &b)?;
                for s in &report.faces {
                    writeln!(out, "face {} {}", s.face, format_db(s.psnr))?;
                }
                writeln!(out, "mean_psnr_db {}", format_db(report.mean_psnr))?;
                writeln!(out, "occupancy_agreement {:.6}", report.occupancy_agreement)?;
            }
            if matches!(kind, MetricKind::D1 | MetricKind::Both) {
                writeln!(out, "d1_psnr_db {}", format_db(d1_psnr(&a, &b)?))?;
            }
        }
        Command::Gop(args) => {
            let text = std::fs::read_to_string(&args.manifest)?;
            let base = args.manifest.parent().unwrap_or(Path::new("."));
            let manifest = read_manifest(&text, base)?;
            let pattern = GopPattern::new(args.period)?;
            let report = gop_simulate(&manifest, args.depth, pattern, MatchParams { window: args.window })?;
            write_atomic(&args.csv, report.to_csv().as_bytes())?;
            let excluded = report.excluded_frames();
            if !excluded.is_empty() {
                writeln!(err, "warning: frames {excluded:?} have infinite PSNR and are excluded from the mean gain")?;
            }
            writeln!(
                out,
                "{} low-resolution frames, mean gain {} dB",
                report.rows.len(),
                format_db(report.mean_gain)
            )?;
        }
        Command::Export { input, binary, out: dst } => {
            let frame = load_voxf(&input)?;
            let points = frame.coords().map(|c| c.map(f64::from)).collect();
            let cloud = PointCloud::with_bbox(
                points,
                frame.colors().map(<[_]>::to_vec),
                BBox { min: [0.0; 3], edge: f64::from(frame.side()) },
            )?;
            let fmt = if binary { PlyFormat::BinaryLittleEndian } else { PlyFormat::Ascii };
            write_atomic(&dst, &write_ply(&cloud, fmt))?;
        }
    }
    Ok(())
}
