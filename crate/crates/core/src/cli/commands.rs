use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use super::config::{load_config, Config, KappaMode, Preset};
use super::manifest::{ArtifactDir, RunManifest};
use super::{AttackArgs, Cli, Command, Common, PresetArg};
use crate::attack::{run_attack, AttackRecord};
use crate::error::{Error, Result};
use crate::evaluation::{
    blackbox_transfer, natural_distances, natural_kappas, percentile, resolve_kappa, sample_objectives, whitebox_sweep,
    Objective, TransferMatrix, WhiteboxSweep,
};
use crate::models::{load_model, save_model, train, Architecture, SequenceRegressor};
use crate::skeldata::{
    load_sbu_tree, make_pairs, read_dataset, synth_generate, write_dataset, Interaction, ParseMode, SequencePair,
    SkeletonSequence,
};

pub(super) fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { common, per_category, frames, joints } => {
            let mut cfg = base_config(&common)?;
            set(&mut cfg.data.per_category, per_category);
            set(&mut cfg.data.frames, frames);
            set(&mut cfg.data.joints, joints);
            cfg.validate()?;
            let mut out = ArtifactDir::open(&common.out, RunManifest::new("synth", &cfg, vec![]))?;
            let records = synth_generate(cfg.seed, cfg.data.per_category, cfg.data.frames, cfg.data.joints)?;
            write_dataset(&out.artifact("dataset.json"), &records)?;
            out.finish()?;
            println!("wrote {} records to {}", records.len(), common.out.join("dataset.json").display());
        }
        Command::Import { common, sbu, lenient } => {
            let cfg = base_config(&common)?;
            let mode = if lenient { ParseMode::Lenient } else { ParseMode::Strict };
            let records = load_sbu_tree(&sbu, mode)?;
            if records.is_empty() {
                return Err(Error::Dataset(format!("no skeleton files found under {}", sbu.display())));
            }
            let mut out = ArtifactDir::open(&common.out, RunManifest::new("import", &cfg, vec![sbu]))?;
            write_dataset(&out.artifact("dataset.json"), &records)?;
            out.finish()?;
            println!("imported {} records", records.len());
        }
        Command::Train { common, data, model, preset, epochs, lr } => {
            let mut cfg = base_config(&common)?;
            set(&mut cfg.model.kind, model);
            set(
                &mut cfg.model.preset,
                preset.map(|p| match p {
                    PresetArg::Tiny => Preset::Tiny,
                    PresetArg::Full => Preset::Full,
                }),
            );
            set(&mut cfg.train.epochs, epochs);
            set(&mut cfg.train.learning_rate, lr);
            cfg.train.seed = cfg.seed;
            cfg.validate()?;
            let mut out = ArtifactDir::open(&common.out, RunManifest::new("train", &cfg, vec![data.clone()]))?;
            let records = read_dataset(&data)?;
            let pairs = partition(&records, &cfg, false)?;
            let dim = pairs[0].input.dim();
            let arch = match cfg.model.preset {
                Preset::Tiny => Architecture::tiny(cfg.model.kind, dim),
                Preset::Full => Architecture::full(cfg.model.kind, dim),
            };
            let model = SequenceRegressor::new(arch, cfg.seed)?;
            let (model, history) = train(model, &pairs, &cfg.train)?;
            save_model(&model, &out.artifact("model.json"))?;
            let mut csv = String::from("epoch,loss\n");
            for (i, l) in history.epoch_loss.iter().enumerate() {
                let _ = writeln!(csv, "{i},{l}");
            }
            out.write("history.csv", &csv)?;
            out.write_json("history.json", &history)?;
            out.finish()?;
            println!("final train mse {}", history.final_loss);
        }
        Command::Attack { common, attack, checkpoint, data, sample, objective, kappa } => {
            let mut cfg = base_config(&common)?;
            apply_attack_args(&mut cfg, &attack);
            cfg.validate()?;
            let mut out = ArtifactDir::open(
                &common.out,
                RunManifest::new("attack", &cfg, vec![checkpoint.clone(), data.clone()]),
            )?;
            let model = load_model(&checkpoint, attack.model)?;
            let records = read_dataset(&data)?;
            let test = partition(&records, &cfg, true)?;
            let pair = test.get(sample).ok_or_else(|| {
                Error::Dataset(format!("sample {sample} out of range: {} held-out pairs", test.len()))
            })?;
            let label: Interaction = objective.parse()?;
            let obj = find_objective(&test, &cfg, label)?;
            let target = obj.target.fit_length(pair.input.frames())?;
            let kappa = match kappa {
                Some(k) => k,
                None => match cfg.eval.kappa_mode {
                    KappaMode::Table => obj.kappa,
                    KappaMode::Natural => {
                        percentile(&natural_distances(&model, &test, &obj.target)?, cfg.eval.kappa_quantile)?
                    }
                },
            };
            let acfg = cfg.attack.to_attack(kappa)?;
            let result = run_attack(&model, &pair.input, &target, &acfg)?;
            let record = AttackRecord::new(&result, &acfg, label, &pair.set_id, &pair.input, &target)?;
            out.write_json("attack.json", &record)?;
            out.finish()?;
            println!(
                "success: {} (distance {} vs kappa {}, step {})",
                result.success, result.distance, result.kappa, result.selected_step
            );
        }
        Command::Eval { common, attack, checkpoint, data, objective, name } => {
            let mut cfg = base_config(&common)?;
            apply_attack_args(&mut cfg, &attack);
            if let Some(e) = attack.epsilon {
                cfg.eval.epsilon_grid = vec![e];
            }
            cfg.validate()?;
            let mut out =
                ArtifactDir::open(&common.out, RunManifest::new("eval", &cfg, vec![checkpoint.clone(), data.clone()]))?;
            let model = load_model(&checkpoint, attack.model)?;
            let records = read_dataset(&data)?;
            let test = partition(&records, &cfg, true)?;
            let mut objectives = sample_objectives(&test, &cfg.eval.tolerances, cfg.eval.objective_seed)?;
            if !objective.is_empty() {
                let keep = objective.iter().map(|s| s.parse()).collect::<Result<Vec<Interaction>>>()?;
                objectives.retain(|o| keep.contains(&o.label));
                if objectives.is_empty() {
                    return Err(Error::Dataset("none of the requested objectives occur in the held-out pairs".into()));
                }
            }
            if cfg.eval.kappa_mode == KappaMode::Natural {
                objectives = natural_kappas(&model, &test, &objectives, cfg.eval.kappa_quantile)?;
            }
            let id = name.unwrap_or_else(|| model.kind().to_string());
            let acfg = cfg.attack.to_attack(0.0)?;
            let sweep = whitebox_sweep(&model, &id, &test, &objectives, &cfg.eval.epsilon_grid, &acfg)?;
            out.write("report.csv", &sweep.report.to_csv())?;
            out.write("report.txt", &sweep.report.summary())?;
            out.write_json("report.json", &sweep.report)?;
            out.write_json("sweep.json", &sweep)?;
            out.finish()?;
            print!("{}", sweep.report.summary());
        }
        Command::Transfer { common, sweep, receiver } => {
            let cfg = base_config(&common)?;
            let sweeps = sweep
                .iter()
                .map(|p| {
                    let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                    Ok(serde_json::from_str::<WhiteboxSweep>(&text)?)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut receivers = Vec::new();
            for arg in &receiver {
                let (name, path) = match arg.split_once('=') {
                    Some((n, p)) => (Some(n.to_string()), PathBuf::from(p)),
                    None => (None, PathBuf::from(arg)),
                };
                let model = load_model(&path, None)?;
                receivers.push((name.unwrap_or_else(|| model.kind().to_string()), model, path));
            }
            let mut matrix = TransferMatrix::default();
            for s in &sweeps {
                for (name, model, _) in &receivers {
                    matrix.entries.push(blackbox_transfer(s, model, name)?);
                }
            }
            let mut inputs = sweep.clone();
            inputs.extend(receivers.iter().map(|r| r.2.clone()));
            let mut out = ArtifactDir::open(&common.out, RunManifest::new("transfer", &cfg, inputs))?;
            out.write("transfer.csv", &matrix.to_csv())?;
            out.write("transfer.txt", &matrix.summary())?;
            out.write_json("transfer.json", &matrix)?;
            out.finish()?;
            print!("{}", matrix.summary());
        }
        Command::Export { common, attack, data, record } => {
            let cfg = base_config(&common)?;
            let (sequences, input): (Vec<(&str, SkeletonSequence)>, PathBuf) = match (attack, data, record) {
                (Some(path), _, _) => {
                    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                    let r: AttackRecord = serde_json::from_str(&text)?;
                    (
                        vec![
                            ("clean", r.clean_input),
                            ("adversarial", r.adversarial.actor),
                            ("response", r.adversarial.reactor),
                            ("target", r.target),
                        ],
                        path,
                    )
                }
                (None, Some(path), Some(i)) => {
                    let mut records = read_dataset(&path)?;
                    if i >= records.len() {
                        return Err(Error::Dataset(format!("record {i} out of range: {} records", records.len())));
                    }
                    let r = records.swap_remove(i);
                    (vec![("actor", r.actor), ("reactor", r.reactor)], path)
                }
                _ => return Err(Error::Config("export needs --attack or --data with --record".into())),
            };
            let mut out = ArtifactDir::open(&common.out, RunManifest::new("export", &cfg, vec![input]))?;
            out.write("frames.csv", &frames_csv(&sequences))?;
            out.finish()?;
        }
    }
    Ok(())
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn base_config(common: &Common) -> Result<Config> {
    let mut cfg = match &common.config {
        Some(p) => load_config(p)?,
        None => Config::default(),
    };
    set(&mut cfg.seed, common.seed);
    Ok(cfg)
}

fn apply_attack_args(cfg: &mut Config, a: &AttackArgs) {
    set(&mut cfg.attack.epsilon, a.epsilon);
    set(&mut cfg.attack.update_rule, a.update_rule);
    set(&mut cfg.attack.mask, a.mask);
    set(&mut cfg.model.kind, a.model);
}

/// Pairs from the held-out sets (`test`) or from the rest.
fn partition(records: &[crate::skeldata::InteractionRecord], cfg: &Config, test: bool) -> Result<Vec<SequencePair>> {
    let held = &cfg.data.held_out;
    let pairs: Vec<SequencePair> =
        records.iter().filter(|r| held.contains(&r.set_id) == test).flat_map(make_pairs).collect();
    if pairs.is_empty() {
        let which = if test { "test" } else { "train" };
        return Err(Error::Dataset(format!("{which} partition is empty (held-out sets: {})", held.join(", "))));
    }
    Ok(pairs)
}

fn find_objective(test: &[SequencePair], cfg: &Config, label: Interaction) -> Result<Objective> {
    sample_objectives(test, &cfg.eval.tolerances, cfg.eval.objective_seed)?
        .into_iter()
        .find(|o| o.label == label)
        .ok_or_else(|| Error::Dataset(format!("no held-out pair of category {label} to take a target from")))
        .and_then(|o| Ok(Objective { kappa: resolve_kappa(&cfg.eval.tolerances, label.label())?, ..o }))
}

/// `sequence,frame,joint,x,y,z`
fn frames_csv(sequences: &[(&str, SkeletonSequence)]) -> String {
    let mut s = String::from("sequence,frame,joint,x,y,z\n");
    for (name, seq) in sequences {
        for t in 0..seq.frames() {
            for j in 0..seq.joints() {
                let [x, y, z] = seq.joint(t, j);
                let _ = writeln!(s, "{name},{t},{j},{x},{y},{z}");
            }
        }
    }
    s
}
