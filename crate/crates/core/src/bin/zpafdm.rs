use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use afdm_core::analysis::{self, MatrixKind};
use afdm_core::channel::ChannelModel;
use afdm_core::config::SimConfig;
use afdm_core::harness::{
    self, efficiency_report, parse_ebn0_list, write_ber_csv, write_efficiency_csv, Scheme, SweepSpec,
};
use afdm_core::params::efficiency;
use afdm_core::zp_afdm::{random_bits, ZpAfdmModem};
use afdm_core::{Error, Result};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "zpafdm", version, about = "ZP-AFDM simulation toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BER sweep, written as CSV.
    Ber(BerArgs),
    /// Dump an effective channel matrix as sparse CSV.
    Matrix(MatrixArgs),
    /// Print the derived frame parameters.
    Params(FrameArgs),
    /// Dump every intermediate vector of one frame.
    Demo(DemoArgs),
    /// Zero padding and efficiency for a list of chi values.
    Efficiency(EfficiencyArgs),
}

/// Frame parameters: a config file plus command-line overrides.
#[derive(Args, Clone)]
struct FrameArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    chi: Option<u32>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    l_max: Option<usize>,
    #[arg(long)]
    cpp_len: Option<usize>,
    /// eva | eva-taps | fig3 | awgn | custom:<file>
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    bandwidth_hz: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl FrameArgs {
    fn resolve(&self) -> Result<SimConfig> {
        let mut c = match &self.config {
            Some(p) => SimConfig::load(p)?,
            None => SimConfig::default(),
        };
        if let Some(v) = self.n {
            c.n = v;
        }
        if let Some(v) = self.chi {
            c.chi = v;
        }
        if let Some(v) = self.k_max {
            c.k_max = v;
        }
        if let Some(v) = self.l_max {
            c.l_max = v;
        }
        if let Some(v) = self.cpp_len {
            c.cpp_len = Some(v);
        }
        if let Some(v) = &self.profile {
            c.profile = ChannelModel::parse(v)?;
        }
        if let Some(v) = self.bandwidth_hz {
            c.bandwidth_hz = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        Ok(c)
    }
}

#[derive(Args)]
struct BerArgs {
    #[command(flatten)]
    frame: FrameArgs,
    /// start:step:stop, a comma list, or `inf`
    #[arg(long, default_value = "0:5:30")]
    ebn0: String,
    /// Comma list; defaults to the config's scheme or zp_afdm.
    #[arg(long, value_delimiter = ',')]
    schemes: Vec<String>,
    /// Comma list; defaults to the config's chi.
    #[arg(long, value_delimiter = ',')]
    chis: Vec<u32>,
    #[arg(long, default_value_t = 100)]
    min_errors: u64,
    #[arg(long, default_value_t = 100_000)]
    min_bits: u64,
    #[arg(long, default_value_t = 10_000)]
    max_frames: u64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MatrixArgs {
    /// aff | zp | recon | foa | freq | time
    #[arg(long)]
    kind: String,
    #[arg(long, default_value = "fig3")]
    profile: String,
    #[arg(long, default_value_t = 2)]
    chi: u32,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k_max: usize,
    #[arg(long, default_value_t = 1)]
    l_max: usize,
    #[arg(long)]
    bandwidth_hz: Option<f64>,
    /// Seed for random profiles.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    #[command(flatten)]
    frame: FrameArgs,
    /// Eb/N0 in dB; `inf` for a noiseless frame.
    #[arg(long, default_value = "20")]
    ebn0: String,
    /// Directory receiving one `<stage>.csv` per vector.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct EfficiencyArgs {
    #[command(flatten)]
    frame: FrameArgs,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16,17,18,19,20")]
    chis: Vec<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn ber(args: BerArgs) -> Result<()> {
    let sim = args.frame.resolve()?;
    let schemes = if args.schemes.is_empty() {
        vec![sim.scheme.unwrap_or(Scheme::ZpAfdm)]
    } else {
        args.schemes.iter().map(|s| Scheme::parse(s)).collect::<Result<_>>()?
    };
    let spec = SweepSpec {
        ebn0_db: parse_ebn0_list(&args.ebn0)?,
        min_bits: args.min_bits,
        min_errors: args.min_errors,
        max_frames: args.max_frames,
        schemes,
        chis: if args.chis.is_empty() { vec![sim.chi] } else { args.chis },
        master_seed: sim.seed,
    };
    spec.validate()?;
    for &chi in &spec.chis {
        let cfg = sim.afdm_with_chi(chi)?;
        for &s in &spec.schemes {
            harness::FrameRunner::new(s, &cfg, &sim.profile)?;
        }
    }
    let records = harness::run_sweep(&spec, &sim.profile, |chi| sim.afdm_with_chi(chi))?;
    let mut out = output(&args.out)?;
    write_ber_csv(&mut out, &records, &spec)?;
    out.flush()?;
    Ok(())
}

fn matrix(args: MatrixArgs) -> Result<()> {
    let kind = MatrixKind::parse(&args.kind)?;
    let mut sim = SimConfig {
        n: args.n,
        chi: args.chi,
        k_max: args.k_max,
        l_max: args.l_max,
        profile: ChannelModel::parse(&args.profile)?,
        ..SimConfig::default()
    };
    if let Some(b) = args.bandwidth_hz {
        sim.bandwidth_hz = b;
    }
    let cfg = sim.afdm()?;
    let chan = sim.profile.prepare(&cfg)?.realize(args.seed);
    let m = analysis::build(kind, &chan, &cfg)?;
    let mut out = output(&args.out)?;
    m.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn params(args: FrameArgs) -> Result<()> {
    let cfg = args.resolve()?.afdm()?;
    println!("N={}", cfg.n);
    println!("chi={}", cfg.chi);
    println!("k_max={}", cfg.k_max);
    println!("l_max={}", cfg.l_max);
    println!("c1={:.12e}", cfg.c1);
    println!("c2={:.12e}", cfg.c2);
    println!("L_c={}", cfg.cpp_len);
    println!("L2={}", cfg.lead_zeros);
    println!("L_z={}", cfg.zero_pad);
    println!("N_d={}", cfg.n_data);
    println!("overhead={:.6}", cfg.overhead());
    println!("efficiency={:.6}", efficiency(&cfg));
    Ok(())
}

fn write_vector(path: &Path, v: &[afdm_core::Complex64]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "index,re,im")?;
    for (i, z) in v.iter().enumerate() {
        writeln!(out, "{i},{:.17e},{:.17e}", z.re, z.im)?;
    }
    out.flush()?;
    Ok(())
}

fn demo(args: DemoArgs) -> Result<()> {
    let sim = args.frame.resolve()?;
    let cfg = sim.afdm()?;
    let ebn0 = match parse_ebn0_list(&args.ebn0)?.as_slice() {
        [v] => *v,
        _ => return Err(Error::Argument("demo takes a single Eb/N0".into())),
    };
    let modem = ZpAfdmModem::new(&cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
    let bits = random_bits(cfg.n_data * cfg.constellation.bits_per_symbol(), &mut rng);
    let chan = sim.profile.prepare(&cfg)?.realize(rng.next_u64());
    let sigma2 = harness::noise_variance(ebn0, cfg.frame_samples(), cfg.n_data, cfg.constellation.bits_per_symbol());
    let trace = modem.trace_frame(&bits, &chan, sigma2, rng.next_u64())?;
    std::fs::create_dir_all(&args.out_dir)?;
    for (name, v) in trace.stages() {
        write_vector(&args.out_dir.join(format!("{name}.csv")), v)?;
    }
    let errors = bits.iter().zip(&trace.bits_hat).filter(|(a, b)| a != b).count();
    println!("bits={} errors={errors}", bits.len());
    Ok(())
}

fn efficiency_cmd(args: EfficiencyArgs) -> Result<()> {
    let sim = args.frame.resolve()?;
    let rows = efficiency_report(&args.chis, |chi| sim.afdm_with_chi(chi))?;
    let mut out = output(&args.out)?;
    write_efficiency_csv(&mut out, &rows)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Command::Ber(a) => ber(a),
        Command::Matrix(a) => matrix(a),
        Command::Params(a) => params(a),
        Command::Demo(a) => demo(a),
        Command::Efficiency(a) => efficiency_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
