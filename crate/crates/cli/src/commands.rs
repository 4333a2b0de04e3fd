use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};

use excerptlab::align::cross_correlate;
use excerptlab::audio::load_wav;
use excerptlab::did::{
    did_m, dose_response, emit_bin_table, event_study, interaction_did, synthetic_did, twfe_did, EstimateOptions,
    EventWindow, SdidConfig,
};
use excerptlab::panel::{read_panel_csv, split_by_popularity, write_panel_csv};
use excerptlab::parallel::map_ordered;
use excerptlab::repetition::{codec_by_name, decile_bin, encoded_length};
use excerptlab::theory::{demand, demand_comparative_statics, simulate_panel, DemandParams, DemandRegime, SimPanelSpec};
use excerptlab::unpredictability::{log_perplexity, tokenize, train_quantizer, ArModel};
use excerptlab::{Clip, Error, Panel};

use crate::args::*;
use crate::output::{emit_json, sidecar, with_run, write_atomic, write_csv_rows, write_json};

pub fn run(cmd: &Command) -> anyhow::Result<()> {
    match cmd {
        Command::Simulate(a) => simulate(cmd, a),
        Command::Estimate(a) => estimate(cmd, a),
        Command::EventStudy(a) => event_study_cmd(cmd, a),
        Command::DoseResponse(a) => dose_cmd(cmd, a),
        Command::DidM(a) => {
            let ds = load_panel(&a.panel)?;
            emit_json(a.out.as_deref(), &with_run(cmd, did_m(&ds)?.to_json()))
        }
        Command::Sdid(a) => sdid_cmd(cmd, a),
        Command::Align(a) => align_cmd(cmd, a),
        Command::MeasureRepetition(a) => repetition_cmd(cmd, a),
        Command::MeasurePerplexity(a) => perplexity_cmd(cmd, a),
        Command::Demand(a) => demand_cmd(cmd, a),
        Command::Replay(a) => replay(a),
    }
}

fn load_panel(a: &PanelArgs) -> anyhow::Result<Panel> {
    let f = File::open(&a.input).with_context(|| format!("cannot open panel {}", a.input.display()))?;
    Ok(read_panel_csv(BufReader::new(f), a.policy_period, a.allow_unbalanced)?)
}

fn options(r: &RegressionArgs) -> EstimateOptions {
    EstimateOptions {
        fixed_effects: r.fe,
        cluster: r.cluster,
        ..EstimateOptions::default()
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    serde_json::from_reader(BufReader::new(f))
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())).into())
}

fn simulate(cmd: &Command, a: &SimulateArgs) -> anyhow::Result<()> {
    let mut spec: SimPanelSpec = match &a.spec {
        Some(p) => read_json(p)?,
        None => SimPanelSpec::default(),
    };
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    let (ds, truth) = simulate_panel::<f64>(&spec)?;
    write_atomic(&a.out, |w| Ok(write_panel_csv(&ds, w)?))?;
    if let Some(t) = &a.truth {
        write_json(t, &with_run(cmd, json!({ "spec": spec, "truth": truth })))?;
    }
    log::info!("wrote {} rows to {}", ds.len(), a.out.display());
    Ok(())
}

fn estimate(cmd: &Command, a: &EstimateArgs) -> anyhow::Result<()> {
    let ds = load_panel(&a.panel)?;
    let opts = options(&a.regression);
    let res = match (a.moderator, a.subsample) {
        (None, _) => twfe_did(&ds, &opts)?,
        (Some(m), None) => interaction_did(&ds, m, &opts)?,
        (Some(m), Some(side)) => {
            let (unpopular, popular) = split_by_popularity(&ds, m);
            let part = if side == Subsample::Popular { popular } else { unpopular };
            let mut r = twfe_did(&part, &opts)?;
            r.spec = format!("twfe_{}_{}", subsample_name(side), m.column());
            r
        }
    };
    emit_json(a.out.as_deref(), &with_run(cmd, res.to_json()))
}

fn subsample_name(s: Subsample) -> &'static str {
    match s {
        Subsample::Popular => "popular",
        Subsample::Unpopular => "unpopular",
    }
}

fn binned_outputs(
    cmd: &Command,
    res: &excerptlab::Estimate,
    out: &Path,
    json_path: Option<&PathBuf>,
) -> anyhow::Result<()> {
    write_atomic(out, |w| Ok(emit_bin_table(res, w)?))?;
    let jp = json_path.cloned().unwrap_or_else(|| sidecar(out, ".json"));
    write_json(&jp, &with_run(cmd, res.to_json()))
}

fn event_study_cmd(cmd: &Command, a: &EventStudyArgs) -> anyhow::Result<()> {
    let ds = load_panel(&a.panel)?;
    let window = EventWindow {
        k_min: a.k_min,
        k_max: a.k_max,
        reference_k: a.reference,
    };
    let res = event_study(&ds, window, &options(&a.regression))?;
    binned_outputs(cmd, &res, &a.out, a.json.as_ref())
}

fn dose_cmd(cmd: &Command, a: &DoseArgs) -> anyhow::Result<()> {
    let ds = load_panel(&a.panel)?;
    let res = dose_response(&ds, a.reference, &options(&a.regression))?;
    binned_outputs(cmd, &res, &a.out, a.json.as_ref())
}

fn sdid_cmd(cmd: &Command, a: &SdidArgs) -> anyhow::Result<()> {
    let ds = load_panel(&a.panel)?;
    let cfg = SdidConfig {
        zeta: a.zeta,
        zeta_time: a.zeta_time,
        ..SdidConfig::default()
    };
    let (res, weights) = synthetic_did(&ds, &cfg)?;
    let mut body = res.to_json();
    body["weights"] = serde_json::to_value(&weights)?;
    emit_json(a.out.as_deref(), &with_run(cmd, body))
}

fn wav(path: &Path) -> anyhow::Result<Clip> {
    load_wav(path).with_context(|| format!("reading {}", path.display()))
}

fn align_cmd(cmd: &Command, a: &AlignArgs) -> anyhow::Result<()> {
    let res = cross_correlate(&wav(&a.excerpt)?, &wav(&a.recording)?)?;
    emit_json(a.out.as_deref(), &with_run(cmd, serde_json::to_value(res)?))
}

/// `*.wav` files directly inside `dir`, sorted by name.
fn wav_files(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    if files.is_empty() {
        return Err(Error::Input(format!("no .wav files in {}", dir.display())).into());
    }
    files.sort();
    Ok(files)
}

fn unit_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn load_all(files: &[PathBuf]) -> anyhow::Result<Vec<Clip>> {
    map_ordered(files.len(), |i| wav(&files[i]))?.into_iter().collect()
}

fn repetition_cmd(cmd: &Command, a: &RepetitionArgs) -> anyhow::Result<()> {
    let codec = codec_by_name(&a.codec)?;
    let files = wav_files(&a.input)?;
    let clips = load_all(&files)?;
    let mut reports = map_ordered(files.len(), |i| encoded_length(&unit_id(&files[i]), &clips[i], codec.as_ref()))?
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let bins = decile_bin(&reports.iter().map(|r| r.normalized).collect::<Vec<_>>(), 10)?;
    for (r, d) in reports.iter_mut().zip(&bins.labels) {
        r.decile = Some(*d);
    }
    write_csv_rows(&a.out, &reports)?;
    write_json(
        &sidecar(&a.out, ".json"),
        &with_run(cmd, json!({ "units": reports.len(), "bins": bins })),
    )
}

#[derive(Serialize)]
struct PerplexityRow {
    unit_id: String,
    log_perplexity: f64,
    tokens_scored: usize,
    per_token_mean: f64,
    decile: u8,
}

fn perplexity_cmd(cmd: &Command, a: &PerplexityArgs) -> anyhow::Result<()> {
    let train = load_all(&wav_files(&a.train)?)?;
    let quantizer = train_quantizer(&train, a.vocab, a.seed)?;
    let corpus = train.iter().map(|c| tokenize(c, &quantizer)).collect::<Result<Vec<_>, _>>()?;
    let model = ArModel::train(&corpus, a.order, a.alpha)?;

    let files = wav_files(&a.score)?;
    let clips = load_all(&files)?;
    let reports = map_ordered(files.len(), |i| {
        tokenize(&clips[i], &quantizer).and_then(|t| log_perplexity(&unit_id(&files[i]), &t, &model))
    })?
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    // per-step mean, so previews of different lengths are comparable
    let bins = decile_bin(&reports.iter().map(|r| r.per_token_mean).collect::<Vec<_>>(), 10)?;
    let rows: Vec<PerplexityRow> = reports
        .into_iter()
        .zip(&bins.labels)
        .map(|(r, &decile)| PerplexityRow {
            unit_id: r.unit_id,
            log_perplexity: r.log_perplexity,
            tokens_scored: r.tokens_scored,
            per_token_mean: r.per_token_mean,
            decile,
        })
        .collect();
    write_csv_rows(&a.out, &rows)?;

    let model_path = a.model.clone().unwrap_or_else(|| sidecar(&a.out, ".model"));
    write_atomic(&model_path, |w| Ok(model.write_to(w)?))?;
    let quantizer_path = sidecar(&model_path, ".quantizer.json");
    write_json(&quantizer_path, &serde_json::to_value(&quantizer)?)?;
    write_json(
        &sidecar(&a.out, ".json"),
        &with_run(
            cmd,
            json!({
                "units": rows.len(),
                "model": model_path,
                "quantizer": quantizer_path,
                "bins": bins,
            }),
        ),
    )
}

fn demand_cmd(cmd: &Command, a: &DemandArgs) -> anyhow::Result<()> {
    let p = DemandParams::new(a.prior, a.theta, a.tau)?;
    let (lo, hi) = p.interior_bounds();
    let mut body = json!({
        "demand": demand(&p),
        "regime": p.regime(),
        "interior_tau": [lo, hi],
    });
    if p.regime() == DemandRegime::Interior {
        body["comparative_statics"] = serde_json::to_value(demand_comparative_statics(&p)?)?;
    }
    emit_json(a.out.as_deref(), &with_run(cmd, body))
}

fn replay(a: &ReplayArgs) -> anyhow::Result<()> {
    let doc: Value = read_json(&a.config)?;
    let config = doc
        .pointer("/run/config")
        .cloned()
        .ok_or_else(|| Error::Input(format!("{} has no run.config record", a.config.display())))?;
    let cmd: Command = serde_json::from_value(config)
        .map_err(|e| Error::Input(format!("{}: unreadable run.config: {e}", a.config.display())))?;
    log::info!("replaying {} from {}", command_name(&cmd), a.config.display());
    run(&cmd)
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Simulate(_) => "simulate",
        Command::Estimate(_) => "estimate",
        Command::EventStudy(_) => "event-study",
        Command::DoseResponse(_) => "dose-response",
        Command::DidM(_) => "did-m",
        Command::Sdid(_) => "sdid",
        Command::Align(_) => "align",
        Command::MeasureRepetition(_) => "measure-repetition",
        Command::MeasurePerplexity(_) => "measure-perplexity",
        Command::Demand(_) => "demand",
        Command::Replay(_) => "replay",
    }
}
