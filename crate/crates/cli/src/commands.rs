use std::path::{Path, PathBuf};

use diazoir_harness::experiments::{learning_curve, noise_experiment, similarity_experiment};
use diazoir_harness::pipeline::{importance, write_file};
use diazoir_harness::report::{render, render_with};
use diazoir_harness::{
    evaluate, explain, features_csv, generate, ingest_csv, split, train, Config, Dataset, FeatureSet, HarnessError,
    LayoutSidecar, ModelBundle, NoiseTarget, Result, Subset, SyntheticParams,
};
use serde_json::json;

use crate::{Cli, Command, SubsetArg, TargetArg};

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(HarnessError::Invalid("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HarnessError::Invalid(e.to_string()))?;
    }
    let cfg = config(&cli)?;
    let strict = cli.strict;
    match cli.command {
        Command::Featurize(a) => {
            let ds = ingest(&a.input, strict)?;
            let f = cfg.featurizer()?;
            write_file(&a.output, &features_csv(&ds, &f, a.all_diazo)?)?;
            let layout = a.layout.unwrap_or_else(|| sidecar_path(&a.output));
            write_file(&layout, &LayoutSidecar::new(&f).to_json())
        }
        Command::Train(a) => {
            let ds = ingest(&a.input, strict)?;
            let t = train(&ds, &cfg)?;
            t.bundle.save(&a.model)?;
            emit(a.output.as_deref(), &render("train", &cfg, &t.report))
        }
        Command::Predict(a) => {
            let bundle = ModelBundle::load(&a.model)?;
            if let Some(s) = a.source.smiles {
                let v = bundle.predict_smiles(&s)?;
                return emit(a.output.as_deref(), &format!("wavenumber_cm1={v}\n"));
            }
            let path = a.source.input.expect("clap requires one source");
            emit(a.output.as_deref(), &predict_csv(&bundle, &path, strict)?)
        }
        Command::Explain(a) => {
            let bundle = ModelBundle::load(&a.model)?;
            let text = match (a.smiles, a.input) {
                (Some(s), _) => render_with("explain", bundle.seed, &bundle.config_hash, &explain(&bundle, &s, a.top_k)?),
                (None, Some(p)) => {
                    let ds = ingest(&p, strict)?;
                    let rows = importance(&bundle, &ds, a.top_k)?;
                    let payload = json!({ "dataset_digest": ds.digest(), "n": ds.len(), "features": rows });
                    render_with("importance", bundle.seed, &bundle.config_hash, &payload)
                }
                (None, None) => unreachable!("clap requires --smiles or --input"),
            };
            emit(a.output.as_deref(), &text)
        }
        Command::Eval(a) => {
            let bundle = ModelBundle::load(&a.model)?;
            let ds = ingest(&a.input, strict)?;
            let subset = match a.subset {
                SubsetArg::Auto => Subset::Auto,
                SubsetArg::Test => Subset::Test,
                SubsetArg::All => Subset::All,
            };
            let out = evaluate(&bundle, &ds, subset)?;
            if let Some(p) = &a.predictions {
                let mut w = csv::Writer::from_writer(Vec::new());
                for r in &out.predictions {
                    w.serialize(r).map_err(|e| HarnessError::Invalid(e.to_string()))?;
                }
                write_file(p, &String::from_utf8(w.into_inner().expect("in-memory")).expect("utf8"))?;
            }
            emit(a.output.as_deref(), &render_with("eval", bundle.seed, &bundle.config_hash, &out))
        }
        Command::Similarity(a) => {
            let ds = ingest(&a.input, strict)?;
            let (bundle, tr, te) = match &a.model {
                Some(p) => {
                    let bundle = ModelBundle::load(p)?;
                    let sp = bundle.recover_split(&ds)?;
                    let all = bundle.features(&ds)?;
                    (bundle, all.subset(&sp.train), all.subset(&sp.test))
                }
                None => {
                    let t = train(&ds, &cfg)?;
                    (t.bundle, t.train, t.test)
                }
            };
            let rep = similarity_experiment(&bundle.mixture, &tr, &te, &cfg.experiments.thresholds)?;
            if let Some(p) = &a.csv {
                write_file(p, &rep.to_csv())?;
            }
            emit(a.output.as_deref(), &render_with("similarity", bundle.seed, &bundle.config_hash, &rep))
        }
        Command::Noise(a) => {
            let ds = ingest(&a.input, strict)?;
            let (tr, te) = split_features(&ds, &cfg)?;
            let ex = &cfg.experiments;
            let target = match a.target {
                Some(TargetArg::Features) => NoiseTarget::Features,
                Some(TargetArg::Labels) => NoiseTarget::Labels,
                Some(TargetArg::Both) => NoiseTarget::Both,
                None => ex.noise_target,
            };
            let repeats = a.repeats.unwrap_or(ex.noise_repeats);
            let rep = noise_experiment(&tr, &te, &cfg.mixture_params(), &ex.noise_levels, repeats, target, cfg.seed)?;
            if let Some(p) = &a.csv {
                write_file(p, &rep.to_csv())?;
            }
            emit(a.output.as_deref(), &render("noise", &cfg, &rep))
        }
        Command::Curve(a) => {
            let ds = ingest(&a.input, strict)?;
            let (tr, te) = split_features(&ds, &cfg)?;
            let cv = (a.cv || cfg.experiments.curve_cv).then_some(cfg.ensemble.k_folds);
            let params = cfg.mixture_params();
            let rep = learning_curve(&tr, &te, &params, &cfg.experiments.fractions, cv, cfg.seed)?;
            if let Some(p) = &a.csv {
                write_file(p, &rep.to_csv())?;
            }
            emit(a.output.as_deref(), &render("curve", &cfg, &rep))
        }
        Command::GenSynthetic(a) => {
            let ds = generate(&SyntheticParams { n: a.n, seed: cfg.seed, noise_sd: a.noise_sd })?;
            emit(a.output.as_deref(), &ds.to_csv())
        }
    }
}

fn config(cli: &Cli) -> Result<Config> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(_), Some(_)) => {
            return Err(HarnessError::Config("--preset cannot be combined with --config; set `preset` in the file".into()))
        }
        (Some(path), None) => Config::load(path)?,
        (None, name) => Config::preset(name.as_deref().unwrap_or("default"))?,
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn ingest(path: &Path, strict: bool) -> Result<Dataset> {
    let ds = ingest_csv(path, strict)?;
    for issue in &ds.issues {
        eprintln!("{}: {issue}", path.display());
    }
    Ok(ds)
}

fn split_features(ds: &Dataset, cfg: &Config) -> Result<(FeatureSet, FeatureSet)> {
    let all = FeatureSet::build(ds, &cfg.featurizer()?)?;
    let sp = split(all.len(), cfg.split.test_fraction, cfg.seed)?;
    Ok((all.subset(&sp.train), all.subset(&sp.test)))
}

fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.file_stem().unwrap_or_default().to_os_string();
    name.push(".layout.json");
    output.with_file_name(name)
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Rows of a CSV with a `smiles` column and an optional `id` column. Rows
/// that cannot be featurised get an empty prediction and the error text,
/// unless `strict`.
fn predict_csv(bundle: &ModelBundle, path: &Path, strict: bool) -> Result<String> {
    let file = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(file);
    let header = rdr.headers().map_err(|e| HarnessError::format(path, e))?.clone();
    let smiles_col = header
        .iter()
        .position(|h| h == "smiles")
        .ok_or_else(|| HarnessError::format(path, "missing column `smiles` in header"))?;
    let id_col = header.iter().position(|h| h == "id");
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| HarnessError::Invalid(e.to_string());
    w.write_record(["id", "smiles", "prediction_cm1", "error"]).map_err(io)?;
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| HarnessError::format(path, e))?;
        let id = id_col.and_then(|c| rec.get(c)).map_or_else(|| (k + 1).to_string(), str::to_string);
        let smiles = rec.get(smiles_col).unwrap_or("");
        match bundle.predict_smiles(smiles) {
            Ok(v) => w.write_record([id.as_str(), smiles, &v.to_string(), ""]).map_err(io)?,
            Err(e) if strict => {
                return Err(HarnessError::Invalid(format!("{}: line {} [{id}]: {e}", path.display(), k + 2)))
            }
            Err(e) => w.write_record([id.as_str(), smiles, "", &e.to_string()]).map_err(io)?,
        }
    }
    Ok(String::from_utf8(w.into_inner().expect("in-memory")).expect("utf8"))
}
