//! Subcommand implementations. Human output goes to stdout with four
//! decimals; files get full precision.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use colortiger::cluster::{trim, TrimConfig};
use colortiger::data::{load_image, load_images, load_manifest, write_synth_dataset, DatasetManifest, Profile};
use colortiger::data::{synth_dataset, SynthConfig};
use colortiger::estimators::{Estimator, DEFAULT_SWEEP_POWER};
use colortiger::eval::{cross_validate_tiger, estimate_all, train_size_curve, CvConfig, DEFAULT_FOLDS};
use colortiger::metrics::{
    angular_errors, nearest_angle_histogram, sae, summarize, table_header, write_summary_csv, ErrorSummary,
};
use colortiger::modelfile;
use colortiger::tiger::{
    learn_gains, pool_sweep, train_color_bengal_tiger, train_color_tiger, GainTriplet, Model, TrainConfig,
    DEFAULT_TRIM,
};
use colortiger::{Illuminant, LinearImage};

use crate::settings::Settings;
use crate::{
    ApplyArgs, CliError, Command, Direction, EstimateArgs, EvalArgs, GainsArgs, HistArgs, Input, Learning, Method,
    SaeArgs, Source, SynthArgs, TrainCbtArgs, TrainCtArgs,
};

type CliResult<T = ()> = Result<T, CliError>;

const DEFAULT_SOG_POWER: u32 = 2;
const DEFAULT_BIN_WIDTH: f64 = 0.25;

pub fn dispatch(command: Command, settings: &Settings) -> CliResult {
    match command {
        Command::Estimate(a) => estimate(a, settings),
        Command::TrainCt(a) => train_ct(a, settings),
        Command::ApplyCt(a) => apply(a, settings, "ct"),
        Command::Gains(a) => gains(a, settings),
        Command::TrainCbt(a) => train_cbt(a, settings),
        Command::ApplyCbt(a) => apply(a, settings, "cbt"),
        Command::Eval(a) => eval(a, settings),
        Command::Sae(a) => sae_cmd(a, settings),
        Command::Hist(a) => hist(a, settings),
        Command::Synth(a) => synth(a, settings),
    }
}

struct Corpus {
    manifest_path: PathBuf,
    manifest: DatasetManifest,
    images: Vec<LinearImage>,
}

impl Corpus {
    fn ground_truths(&self) -> Vec<Illuminant> {
        self.manifest.ground_truths()
    }

    fn provenance(&self) -> String {
        format!("{} images from {}", self.images.len(), self.manifest_path.display())
    }
}

fn profile_for(input: &Input, settings: &Settings, manifest_profile: &str) -> CliResult<Profile> {
    let name = settings.pick("profile", input.profile.clone(), manifest_profile.to_string())?;
    Ok(Profile::by_name(&name)?)
}

fn load_corpus(input: &Input, settings: &Settings) -> CliResult<Corpus> {
    let manifest_path: PathBuf = settings
        .pick_opt("manifest", input.manifest.clone())?
        .ok_or_else(|| CliError::Usage("--manifest is required".into()))?;
    load_corpus_at(&manifest_path, input, settings)
}

fn load_corpus_at(manifest_path: &Path, input: &Input, settings: &Settings) -> CliResult<Corpus> {
    let manifest = load_manifest(manifest_path).map_err(|e| match e {
        colortiger::Error::Io(io) => CliError::Data(format!("cannot read {}: {io}", manifest_path.display())),
        other => other.into(),
    })?;
    let profile = profile_for(input, settings, &manifest.profile)?;
    let images = load_images(&manifest, &profile)?;
    Ok(Corpus { manifest_path: manifest_path.to_path_buf(), manifest, images })
}

fn train_config(learning: &Learning, settings: &Settings, fallback: TrainConfig) -> CliResult<TrainConfig> {
    Ok(TrainConfig::new(
        settings.pick("n", learning.n, fallback.n)?,
        settings.pick("t", learning.t, fallback.t)?,
        settings.pick("seed", learning.seed, fallback.seed)?,
    )?)
}

fn estimator_for(method: Method, p: Option<u32>, settings: &Settings) -> CliResult<Estimator> {
    Ok(match method {
        Method::Gw => Estimator::GrayWorld,
        Method::Wp => Estimator::WhitePatch,
        Method::Sog => Estimator::ShadesOfGray(settings.pick("p", p, DEFAULT_SOG_POWER)?),
    })
}

fn load_model(path: &Path, method: &str) -> CliResult<Model> {
    let model = modelfile::load(path)?;
    if model.method() != method {
        return Err(CliError::Data(format!(
            "{} holds a {} model, expected {method}",
            path.display(),
            model.method()
        )));
    }
    Ok(model)
}

fn apply_model(model: &Model, images: &[LinearImage]) -> CliResult<Vec<Illuminant>> {
    use rayon::prelude::*;
    Ok(images.par_iter().map(|img| model.apply(img)).collect::<colortiger::Result<_>>()?)
}

/// Estimates of a per-image source, one per image.
fn per_image_estimates(
    source: Source,
    p: Option<u32>,
    model: Option<&Path>,
    images: &[LinearImage],
    settings: &Settings,
) -> CliResult<(String, Vec<Illuminant>)> {
    let method = match source {
        Source::Gw => Method::Gw,
        Source::Wp => Method::Wp,
        Source::Sog => Method::Sog,
        Source::Model => {
            let path: PathBuf = settings
                .pick_opt("model", model.map(Path::to_path_buf))?
                .ok_or_else(|| CliError::Usage("--estimator model needs --model".into()))?;
            let m = modelfile::load(&path)?;
            let name = m.method().to_string();
            return Ok((name, apply_model(&m, images)?));
        }
        Source::Sweep => return Err(CliError::Usage("the sweep pool has no per-image pairing".into())),
    };
    let est = estimator_for(method, p, settings)?;
    Ok((est.name(), estimate_all(images, est)?))
}

fn write_estimates(path: &Path, corpus: &Corpus, estimates: &[Illuminant], errors: Option<&[f64]>) -> CliResult {
    let mut out = String::from(if errors.is_some() { "path,r,g,b,error\n" } else { "path,r,g,b\n" });
    for (i, (entry, e)) in corpus.manifest.entries.iter().zip(estimates).enumerate() {
        let v = e.to_array();
        let _ = write!(out, "{},{},{},{}", entry.path.display(), v[0], v[1], v[2]);
        if let Some(errs) = errors {
            let _ = write!(out, ",{}", errs[i]);
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

fn print_summary(label: &str, summary: &ErrorSummary) {
    println!("{}", table_header());
    println!("{}", summary.table_row(label));
}

fn fmt_rgb(v: [f64; 3]) -> String {
    format!("({:.4}, {:.4}, {:.4})", v[0], v[1], v[2])
}

fn print_centers(centers: &[Illuminant; 2]) {
    for (i, (c, name)) in centers.iter().zip(["warm", "cool"]).enumerate() {
        let ch = c.chromaticity();
        println!("center{i} ({name}): r={:.4} b={:.4}  rgb={}", ch.r, ch.b, fmt_rgb(c.to_array()));
    }
}

fn estimate(a: EstimateArgs, settings: &Settings) -> CliResult {
    let est = estimator_for(a.method, a.p, settings)?;
    if let Some(path) = &a.image {
        let name = settings.pick("profile", a.input.profile.clone(), "plain".to_string())?;
        let img = load_image(path, &Profile::by_name(&name)?)?;
        let e = est.estimate(&img)?;
        println!("{}: {}", est.name(), fmt_rgb(e.to_array()));
        if let Some(out) = &a.out {
            let v = e.to_array();
            fs::write(out, format!("path,r,g,b\n{},{},{},{}\n", path.display(), v[0], v[1], v[2]))?;
        }
        return Ok(());
    }
    let corpus = load_corpus(&a.input, settings)?;
    let estimates = estimate_all(&corpus.images, est)?;
    let errors = angular_errors(&corpus.ground_truths(), &estimates)?;
    println!("{} on {} images", est.name(), corpus.images.len());
    print_summary(&est.name(), &summarize(&errors)?);
    if let Some(out) = &a.out {
        write_estimates(out, &corpus, &estimates, Some(&errors))?;
    }
    Ok(())
}

fn train_ct(a: TrainCtArgs, settings: &Settings) -> CliResult {
    let corpus = load_corpus(&a.input, settings)?;
    let cfg = train_config(&a.learning, settings, TrainConfig::default())?;
    let mut model = train_color_tiger(&corpus.images, &cfg)?;
    model.provenance = corpus.provenance();
    println!(
        "Color Tiger trained on {} images (n={}, t={}, seed={})",
        corpus.images.len(),
        cfg.n,
        cfg.t,
        cfg.seed
    );
    print_centers(model.centers());
    modelfile::save(&Model::Tiger(model), &a.out)?;
    println!("model written to {}", a.out.display());
    Ok(())
}

fn apply(a: ApplyArgs, settings: &Settings, method: &str) -> CliResult {
    let model = load_model(&a.model, method)?;
    let corpus = load_corpus(&a.input, settings)?;
    let estimates = apply_model(&model, &corpus.images)?;
    let errors = angular_errors(&corpus.ground_truths(), &estimates)?;
    let mut distinct: Vec<Illuminant> = Vec::new();
    for e in &estimates {
        if !distinct.contains(e) {
            distinct.push(*e);
        }
    }
    println!("{method} applied to {} images, {} distinct outputs", corpus.images.len(), distinct.len());
    print_summary(method, &summarize(&errors)?);
    if let Some(out) = &a.out {
        write_estimates(out, &corpus, &estimates, Some(&errors))?;
    }
    Ok(())
}

fn gains_text(g: &GainTriplet) -> String {
    let v = g.to_array();
    format!("r,g,b\n{},{},{}\n", v[0], v[1], v[2])
}

fn print_gains(label: &str, g: &GainTriplet) {
    let v = g.to_array();
    println!("{label}: {}  r/g={:.4} b/g={:.4}", fmt_rgb(v), v[0] / v[1], v[2] / v[1]);
}

fn gains(a: GainsArgs, settings: &Settings) -> CliResult {
    let corpus = load_corpus(&a.input, settings)?;
    let n = settings.pick("n", a.n, DEFAULT_SWEEP_POWER)?;
    let g = learn_gains(&corpus.images, n)?;
    print_gains("gains", &g);
    if let Some(out) = &a.out {
        fs::write(out, gains_text(&g))?;
    }
    Ok(())
}

fn train_cbt(a: TrainCbtArgs, settings: &Settings) -> CliResult {
    let source = load_corpus(&a.input, settings)?;
    let target = load_corpus_at(&a.target, &Input { manifest: None, profile: None }, settings)?;
    let cfg = train_config(&a.learning, settings, TrainConfig::default())?;
    let mut model = train_color_bengal_tiger(&source.images, &target.images, &cfg)?;
    model.provenance = format!("{}; target {}", source.provenance(), target.provenance());
    println!(
        "Color Bengal Tiger trained on {} images, target gains from {} images (n={}, t={}, seed={})",
        source.images.len(),
        target.images.len(),
        cfg.n,
        cfg.t,
        cfg.seed
    );
    print_gains("source gains", &model.source_gains);
    print_gains("target gains", &model.target_gains);
    print_centers(model.centers());
    modelfile::save(&Model::Bengal(model), &a.out)?;
    println!("model written to {}", a.out.display());
    Ok(())
}

fn eval(a: EvalArgs, settings: &Settings) -> CliResult {
    let fallback = match settings.pick_opt("model", a.model.clone())? {
        Some(path) => match load_model(&path, "ct")? {
            Model::Tiger(m) => m.config,
            Model::Bengal(_) => unreachable!("load_model checked the method"),
        },
        None => TrainConfig::default(),
    };
    let train = train_config(&a.learning, settings, fallback)?;
    let corpus = load_corpus(&a.input, settings)?;
    let gts = corpus.ground_truths();
    let cv = CvConfig {
        folds: settings.pick("folds", a.folds, DEFAULT_FOLDS)?,
        fold_seed: train.seed,
        train,
        train_limit: None,
        subset_seed: 0,
    };
    let limits: Option<Vec<usize>> = match a.train_limit {
        Some(l) => Some(l),
        None => settings
            .get::<String>("train-limit")?
            .map(|raw| {
                raw.split(',')
                    .map(|s| s.trim().parse().map_err(|_| CliError::Usage(format!("bad train limit {s:?}"))))
                    .collect::<CliResult<Vec<usize>>>()
            })
            .transpose()?,
    };
    println!(
        "{}-fold cross-validation on {} images (n={}, t={}, seed={})",
        cv.folds,
        corpus.images.len(),
        train.n,
        train.t,
        train.seed
    );
    if let Some(limits) = limits {
        let draws = settings.pick("draws", a.draws, 1)?;
        let curve = train_size_curve(&corpus.images, &gts, &cv, &limits, draws)?;
        let mut csv = String::from("limit,draws,median\n");
        println!("{:<8} {:>6} {:>9}", "limit", "draws", "median");
        for p in &curve {
            let limit = p.limit.map_or("all".to_string(), |l| l.to_string());
            println!("{limit:<8} {:>6} {:>9.4}", p.draws, p.median);
            let _ = writeln!(csv, "{limit},{},{}", p.draws, p.median);
        }
        if let Some(out) = &a.out {
            fs::write(out, csv)?;
        }
        return Ok(());
    }
    let report = cross_validate_tiger(&corpus.images, &gts, &cv)?;
    let mut rows: Vec<(String, ErrorSummary)> = Vec::new();
    println!("{}", table_header());
    for (i, f) in report.folds.iter().enumerate() {
        let label = format!("fold{} (train {}, test {})", i + 1, f.train_size, f.test_indices.len());
        println!("{}", f.summary.table_row(&label));
        rows.push((format!("fold{}", i + 1), f.summary));
    }
    println!("{}", report.pooled.table_row("pooled"));
    rows.push(("pooled".into(), report.pooled));
    if let Some(out) = &a.out {
        let mut buf = Vec::new();
        write_summary_csv(&mut buf, &rows)?;
        fs::write(out, buf)?;
    }
    if let Some(out) = &a.errors_out {
        write_estimates(out, &corpus, &report.estimates, Some(&report.errors))?;
    }
    Ok(())
}

fn sae_cmd(a: SaeArgs, settings: &Settings) -> CliResult {
    let corpus = load_corpus(&a.input, settings)?;
    let (name, estimates) = per_image_estimates(a.estimator, a.p, a.model.as_deref(), &corpus.images, settings)?;
    let gts = corpus.ground_truths();
    let result = sae(&gts, &estimates)?;
    println!("SAE of {name} over {} images: {:.4} deg", gts.len(), result.sae);
    if let Some(out) = &a.out {
        let mut csv = format!("# sae={}\ngt_index,estimate_index,angle\n", result.sae);
        for (i, &j) in result.assignment.iter().enumerate() {
            let _ = writeln!(csv, "{i},{j},{}", gts[i].angle_to(&estimates[j]));
        }
        fs::write(out, csv)?;
    }
    Ok(())
}

fn hist(a: HistArgs, settings: &Settings) -> CliResult {
    let corpus = load_corpus(&a.input, settings)?;
    let gts = corpus.ground_truths();
    let (name, estimates) = if a.estimator == Source::Sweep {
        let n = settings.pick("n", a.n, DEFAULT_SWEEP_POWER)?;
        let pool = pool_sweep(&corpus.images, n)?;
        if a.trim {
            let t = settings.pick("t", a.t, DEFAULT_TRIM)?;
            let seed = settings.pick("seed", a.seed, 0)?;
            (format!("trimmed sweep n={n} t={t}"), trim(&pool, TrimConfig::new(t, 2)?, seed)?)
        } else {
            (format!("sweep n={n}"), pool)
        }
    } else {
        per_image_estimates(a.estimator, a.p, a.model.as_deref(), &corpus.images, settings)?
    };
    let bin_width = settings.pick("bin-width", a.bin_width, DEFAULT_BIN_WIDTH)?;
    let (from, to, label) = match a.direction {
        Direction::EstToGt => (&estimates, &gts, "estimate -> closest ground truth"),
        Direction::GtToEst => (&gts, &estimates, "ground truth -> closest estimate"),
    };
    let h = nearest_angle_histogram(from, to, bin_width)?;
    println!("{name}, {label}, {} angles", h.angles.len());
    println!("{:>9} {:>9} {:>9}", "from", "to", "percent");
    for (lo, hi, pct) in h.rows() {
        println!("{lo:>9.4} {hi:>9.4} {pct:>9.4}");
    }
    if let Some(out) = &a.out {
        let mut buf = Vec::new();
        h.write_csv(&mut buf)?;
        fs::write(out, buf)?;
    }
    Ok(())
}

fn synth(a: SynthArgs, settings: &Settings) -> CliResult {
    let base = SynthConfig::default();
    let separation = settings.pick("separation", a.separation, 20.0)?;
    if !(0.0..70.0).contains(&separation) {
        return Err(CliError::Usage(format!("separation {separation} must lie in [0, 70) degrees")));
    }
    let (mode_a, mode_b) = SynthConfig::symmetric_modes(separation);
    let gains = match a.gains {
        Some(g) => g,
        None => match settings.get::<String>("gains")? {
            Some(raw) => raw
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| CliError::Usage(format!("bad gain {s:?}"))))
                .collect::<CliResult<Vec<f64>>>()?,
            None => base.gains.to_array().to_vec(),
        },
    };
    if gains.len() != 3 {
        return Err(CliError::Usage("gains need three values r,g,b".into()));
    }
    let gains = GainTriplet::new(gains[0], gains[1], gains[2]).map_err(|e| CliError::Usage(e.to_string()))?;
    let cfg = SynthConfig {
        image_count: settings.pick("count", a.count, base.image_count)?,
        width: settings.pick("width", a.width, base.width)?,
        height: settings.pick("height", a.height, base.height)?,
        mode_a,
        mode_b,
        mode_spread: settings.pick("spread", a.spread, base.mode_spread)?,
        mode_mix: settings.pick("mix", a.mix, base.mode_mix)?,
        gains,
        noise_sigma: settings.pick("noise", a.noise, base.noise_sigma)?,
        scene_cast: settings.pick("scene-cast", a.scene_cast, base.scene_cast)?,
        outlier_fraction: settings.pick("outlier-fraction", a.outlier_fraction, base.outlier_fraction)?,
        outlier_cast: settings.pick("outlier-cast", a.outlier_cast, base.outlier_cast)?,
        seed: settings.pick("seed", a.seed, base.seed)?,
    };
    let data = synth_dataset(&cfg)?;
    let manifest = write_synth_dataset(&a.out, &data, &cfg)?;
    println!("{} images of {}x{} written to {}", cfg.image_count, cfg.width, cfg.height, a.out.display());
    println!("warm mode {}  cool mode {}", fmt_rgb(mode_a.to_array()), fmt_rgb(mode_b.to_array()));
    print_gains("gains", &gains);
    println!("manifest {}", manifest.display());
    Ok(())
}
