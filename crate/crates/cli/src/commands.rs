use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use subsim::classifier::{self, SavedModel, ThresholdModel};
use subsim::corpus::{self, Measure, PairRecord, ScoredPair};
use subsim::embeddings::{self, EmbeddingTable};
use subsim::groupsim;
use subsim::metrics::EvalReport;
use subsim::{selftest as check, synthetic, Error};

use crate::config::{
    EvalArgs, ProtocolArgs, ScoreArgs, SelftestArgs, SimArgs, SimilarityArgs, SynthArgs, TrainArgs,
};

pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn io(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io { .. } => 1,
            Error::DegenerateTraining(_) => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn write_err(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::io(format!("{}: {e}", path.display()))
}

fn load_table(args: &SimilarityArgs) -> Result<EmbeddingTable, Failure> {
    let table = embeddings::load_embeddings(&args.embeddings, args.limit)?;
    if table.duplicates() > 0 {
        eprintln!(
            "note: {} duplicate tokens in {} ignored (first occurrence kept)",
            table.duplicates(),
            args.embeddings.display()
        );
    }
    Ok(table)
}

fn protocol_records(args: &ProtocolArgs) -> Result<(Vec<PairRecord>, Vec<PairRecord>), Failure> {
    let records = corpus::load_pairs(&args.corpus)?;
    let parts = match &args.test_corpus {
        Some(test) => (records, corpus::load_pairs(test)?),
        None => corpus::split(&records, &args.split_spec())?,
    };
    match &args.test_corpus {
        Some(test) => println!(
            "split: {} train ({}) / {} test ({})",
            parts.0.len(),
            args.corpus.display(),
            parts.1.len(),
            test.display()
        ),
        None => println!(
            "split: {} train / {} test (fraction {}, seed {})",
            parts.0.len(),
            parts.1.len(),
            args.fraction,
            args.seed
        ),
    }
    Ok(parts)
}

fn skipped(scored: &[ScoredPair]) -> usize {
    scored.iter().filter(|s| s.is_skipped()).count()
}

pub fn sim(args: &SimArgs) -> CmdResult {
    let table = load_table(&args.similarity)?;
    let dedup = !args.similarity.no_dedup;
    let group = |text: &str, label: &str| {
        embeddings::sentence_to_group(&embeddings::tokenize(text), &table, dedup).map_err(|e| {
            match e {
                Error::EmptySentenceGroup { missing } => Failure {
                    code: 2,
                    message: format!(
                        "{label} has no token with an embedding (missing: {})",
                        missing.join(" ")
                    ),
                },
                other => other.into(),
            }
        })
    };
    let a = group(&args.text1, "text1")?;
    let b = group(&args.text2, "text2")?;
    for (label, s) in [("text1", &a), ("text2", &b)] {
        if !s.missing.is_empty() {
            eprintln!(
                "note: {label} tokens without embedding: {}",
                s.missing.join(" ")
            );
        }
    }
    let value = groupsim::sim_symmetric_with(&a.group, &b.group, &args.similarity.sim_options())?;
    println!("SIM {:.6}", value.value);
    println!("cos(text2 -> text1) {:.6}", value.b_to_a);
    println!("cos(text1 -> text2) {:.6}", value.a_to_b);
    println!("evaluations {}", value.evaluations);
    Ok(())
}

pub fn score(args: &ScoreArgs) -> CmdResult {
    let table = load_table(&args.similarity)?;
    let records = corpus::load_pairs(&args.corpus)?;
    let scored = corpus::score_pairs(
        &records,
        &table,
        &args.similarity.score_options(args.measure.into()),
    );
    match &args.output {
        Some(path) => {
            let file = File::create(path).map_err(write_err(path))?;
            let mut out = BufWriter::new(file);
            corpus::write_scored(&scored, &mut out)
                .and_then(|_| out.flush())
                .map_err(write_err(path))?;
        }
        None => corpus::write_scored(&scored, io::stdout().lock())
            .map_err(|e| Failure::io(format!("stdout: {e}")))?,
    }
    eprintln!(
        "scored {} pairs, skipped {}",
        scored.len() - skipped(&scored),
        skipped(&scored)
    );
    Ok(())
}

pub fn train(args: &TrainArgs) -> CmdResult {
    let table = load_table(&args.similarity)?;
    let (train_part, _) = protocol_records(&args.protocol)?;
    let measure: Measure = args.protocol.measure.into();
    let scored = corpus::score_pairs(&train_part, &table, &args.similarity.score_options(measure));
    let (_, report) = classifier::train(&scored, args.mode.into(), args.objective.into())?;
    SavedModel::from_report(&report).save(&args.model_out)?;
    println!("measure: {measure}");
    println!("{report}");
    println!("model written to {}", args.model_out.display());
    Ok(())
}

fn print_eval(measure: Measure, model: &ThresholdModel, report: &EvalReport) {
    let bound = |b: Option<f64>| b.map_or_else(|| "--".to_owned(), |v| format!("{v:.4}"));
    println!();
    println!(
        "== measure {measure}, mode {}, lower (a) {}, upper (b) {}",
        model.mode(),
        bound(model.lower()),
        bound(model.upper())
    );
    println!("{report}");
}

pub fn eval(args: &EvalArgs) -> CmdResult {
    let saved = SavedModel::load(&args.model)
        .map_err(|e| Failure::io(format!("cannot read model {}: {e}", args.model.display())))?;
    let table = load_table(&args.similarity)?;
    let (train_part, test_part) = protocol_records(&args.protocol)?;
    let measure: Measure = args.protocol.measure.into();

    let scored = corpus::score_pairs(&test_part, &table, &args.similarity.score_options(measure));
    let report = classifier::evaluate_scored(&scored, &saved.model)?;
    print_eval(measure, &saved.model, &report);
    let mut reports = vec![(measure, report)];

    if args.compare {
        let other = match measure {
            Measure::ProjectionSim => Measure::PairwiseMean,
            Measure::PairwiseMean => Measure::ProjectionSim,
        };
        let options = args.similarity.score_options(other);
        let scored_train = corpus::score_pairs(&train_part, &table, &options);
        let (model, _) = classifier::train(&scored_train, saved.model.mode(), saved.objective)?;
        let scored_test = corpus::score_pairs(&test_part, &table, &options);
        let report = classifier::evaluate_scored(&scored_test, &model)?;
        print_eval(other, &model, &report);
        reports.push((other, report));
    }

    if let Some(path) = &args.report_tsv {
        let file = File::create(path).map_err(write_err(path))?;
        let mut out = BufWriter::new(file);
        for (measure, report) in &reports {
            writeln!(out, "# measure={measure}")
                .and_then(|_| report.write_tsv(&mut out))
                .map_err(write_err(path))?;
        }
        out.flush().map_err(write_err(path))?;
    }
    Ok(())
}

pub fn selftest(args: &SelftestArgs) -> CmdResult {
    let report = check::run(args.trials, args.seed, args.tol, args.agreement)?;
    println!(
        "{} instances ({} singular redrawn), max |cos_basis - cos_gram| = {:.3e}, limit {:.1e}",
        report.trials, report.redrawn, report.max_abs_diff, report.tolerance
    );
    if report.passed() {
        println!("selftest passed");
        Ok(())
    } else {
        Err(Failure {
            code: 4,
            message: "basis and Gram routes disagree".into(),
        })
    }
}

pub fn synth(args: &SynthArgs) -> CmdResult {
    let corpus = synthetic::orthogonal_corpus(args.count, args.seed);
    let write = |path: &Path, f: &dyn Fn(&mut BufWriter<File>) -> io::Result<()>| -> CmdResult {
        let mut out = BufWriter::new(File::create(path).map_err(write_err(path))?);
        f(&mut out)
            .and_then(|_| out.flush())
            .map_err(write_err(path))
    };
    write(&args.pairs_out, &|out| {
        corpus::write_pairs(&corpus.records, out)
    })?;
    write(&args.embeddings_out, &|out| corpus.table.write_text(out))?;
    println!(
        "wrote {} pairs to {} and {} embeddings to {}",
        corpus.records.len(),
        args.pairs_out.display(),
        corpus.table.len(),
        args.embeddings_out.display()
    );
    Ok(())
}
