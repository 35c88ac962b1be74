//! Stream and annotation loading: reads fact files (or CSV), checks
//! ordering, and partitions records into consecutive batch windows of a
//! fixed number of time points with attached annotation states.

use std::fs;
use std::path::Path;

use thiserror::Error;

use super::parser::{parse_facts, record_from_atom, ParseError, StreamRecord};
use crate::interp::{Interpretation, InterpError, TrueState};
use crate::logic::{Atom, Term, HOLDS};
use crate::Time;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{source}")]
    Parse { path: String, source: ParseError },
    #[error("{path}: record {index} at time {time} is out of order (previous time {previous})")]
    Unsorted {
        path: String,
        index: usize,
        time: Time,
        previous: Time,
    },
    #[error("{path}: csv row {row}: {message}")]
    Csv {
        path: String,
        row: usize,
        message: String,
    },
    #[error("batch size must be at least one time point")]
    BadBatchSize,
    #[error("annotation record is not a holdsAt fact: {0:?}")]
    BadAnnotation(Atom),
    #[error(transparent)]
    Interp(#[from] InterpError),
}

/// A time-stamped annotated target CE instance.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct AnnotationRecord {
    pub time: Time,
    pub fluent: Term,
}

/// One loaded mini-batch: the interpretation plus its annotation state,
/// when an annotation file was given.
#[derive(Clone, Debug)]
pub struct Batch {
    pub interp: Interpretation,
    pub truth: Option<TrueState>,
}

fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads stream records from the fact syntax or, for `.csv` files, rows of
/// `time,predicate,arg1..argN` (args in term syntax; a header row is
/// skipped when the first field is not an integer).
pub fn read_records(path: &Path) -> Result<Vec<StreamRecord>, LoadError> {
    if is_csv(path) {
        read_csv_records(path)
    } else {
        parse_facts(&read(path)?).map_err(|source| LoadError::Parse {
            path: path.display().to_string(),
            source,
        })
    }
}

fn read_csv_records(path: &Path) -> Result<Vec<StreamRecord>, LoadError> {
    let err = |row: usize, message: String| LoadError::Csv {
        path: path.display().to_string(),
        row,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| err(0, e.to_string()))?;
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| err(i + 1, e.to_string()))?;
        if row.len() < 2 {
            return Err(err(i + 1, "need at least time and predicate columns".into()));
        }
        let time_field = row.get(0).unwrap().trim();
        if i == 0 && time_field.parse::<Time>().is_err() {
            continue; // header row
        }
        let time: Time = time_field
            .parse()
            .map_err(|_| err(i + 1, format!("bad time value '{time_field}'")))?;
        let predicate = row.get(1).unwrap().trim().to_string();
        let mut args = Vec::new();
        for field in row.iter().skip(2) {
            let term = parse_term_field(field.trim())
                .map_err(|m| err(i + 1, format!("bad term '{field}': {m}")))?;
            args.push(term);
        }
        args.push(Term::constant(time.to_string()));
        let record = record_from_atom(Atom::new(predicate, args))
            .map_err(|m| err(i + 1, m))?;
        out.push(record);
    }
    Ok(out)
}

fn parse_term_field(field: &str) -> Result<Term, String> {
    // reuse the fact parser on a synthetic wrapper
    let text = format!("w({field},0).");
    let records = parse_facts(&text).map_err(|e| e.message)?;
    Ok(records[0].fact.args[0].clone())
}

fn check_sorted(path: &Path, records: &[StreamRecord]) -> Result<(), LoadError> {
    for (i, pair) in records.windows(2).enumerate() {
        if pair[1].time < pair[0].time {
            return Err(LoadError::Unsorted {
                path: path.display().to_string(),
                index: i + 1,
                time: pair[1].time,
                previous: pair[0].time,
            });
        }
    }
    Ok(())
}

fn read_annotations(path: &Path) -> Result<Vec<AnnotationRecord>, LoadError> {
    let records = read_records(path)?;
    let mut out = Vec::new();
    for r in records {
        if r.fact.predicate != HOLDS || r.fact.args.len() != 2 {
            return Err(LoadError::BadAnnotation(r.fact));
        }
        out.push(AnnotationRecord {
            time: r.time,
            fluent: r.fact.args[0].clone(),
        });
    }
    Ok(out)
}

/// Loads a stream (and optional annotation) and partitions it into
/// consecutive, non-overlapping windows of `batch_size` time points that
/// jointly cover every record. Each batch's initial state is the annotated
/// state at its window start (empty without annotation); each batch's true
/// state covers `[t_start, t_end + 1]`.
pub fn load_stream(
    data_path: &Path,
    annotation_path: Option<&Path>,
    batch_size: usize,
) -> Result<Vec<Batch>, LoadError> {
    if batch_size == 0 {
        return Err(LoadError::BadBatchSize);
    }
    let records = read_records(data_path)?;
    check_sorted(data_path, &records)?;
    let annotations = match annotation_path {
        Some(p) => Some(read_annotations(p)?),
        None => None,
    };
    Ok(build_batches(&records, annotations.as_deref(), batch_size))
}

/// Pure batching over in-memory records, shared by the loader and the
/// synthetic generator.
pub fn build_batches(
    records: &[StreamRecord],
    annotations: Option<&[AnnotationRecord]>,
    batch_size: usize,
) -> Vec<Batch> {
    let Some(first) = records.first() else {
        return Vec::new();
    };
    let t0 = first.time;
    let t_max = records.last().map(|r| r.time).unwrap_or(t0);
    let mut batches = Vec::new();
    let mut t_start = t0;
    let mut idx = 0usize;
    while t_start <= t_max {
        let t_end = (t_start + batch_size as Time - 1).min(t_max);
        let mut obs = Vec::new();
        while idx < records.len() && records[idx].time <= t_end {
            obs.push((records[idx].time, records[idx].fact.clone()));
            idx += 1;
        }
        let initial: Vec<Term> = annotations
            .iter()
            .flat_map(|a| a.iter())
            .filter(|a| a.time == t_start)
            .map(|a| a.fluent.clone())
            .collect();
        let interp = Interpretation::new(t_start, t_end, obs, initial)
            .expect("windowed records are in range by construction");
        let truth = annotations.map(|a| {
            TrueState::new(
                t_start,
                t_end,
                a.iter()
                    .filter(|r| r.time >= t_start && r.time <= t_end + 1)
                    .map(|r| (r.fluent.clone(), r.time)),
            )
        });
        batches.push(Batch { interp, truth });
        t_start = t_end + 1;
    }
    batches
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(name: &str, content: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("wec-loader-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    fn record(ev: &str, t: Time) -> StreamRecord {
        StreamRecord {
            time: t,
            fact: Atom::new(
                "happensAt",
                vec![Term::constant(ev), Term::constant(t.to_string())],
            ),
        }
    }

    #[test]
    fn windows_tile_the_stream() {
        let records: Vec<StreamRecord> = (0..100).map(|t| record("e", t)).collect();
        let batches = build_batches(&records, None, 50);
        assert_eq!(batches.len(), 2);
        assert_eq!(
            (batches[0].interp.t_start(), batches[0].interp.t_end()),
            (0, 49)
        );
        assert_eq!(
            (batches[1].interp.t_start(), batches[1].interp.t_end()),
            (50, 99)
        );
        let total: usize = batches
            .iter()
            .map(|b| b.interp.all_observations().count())
            .sum();
        assert_eq!(total, 100);
    }

    #[test]
    fn oversized_batch_gives_single_window() {
        let records: Vec<StreamRecord> = (0..10).map(|t| record("e", t)).collect();
        let batches = build_batches(&records, None, 1000);
        assert_eq!(batches.len(), 1);
        assert_eq!(batches[0].interp.t_end(), 9);
    }

    #[test]
    fn caviar_style_fragment() {
        let data = write_temp(
            "frag.lp",
            "happensAt(walk(id1),1).\nhappensAt(walk(id2),1).\ncoords(id1,201,454,1).\n",
        );
        let ann = write_temp(
            "frag_ann.lp",
            "holdsAt(move(id1,id2),2).\nholdsAt(move(id2,id1),2).\n",
        );
        let batches = load_stream(&data, Some(&ann), 10).unwrap();
        assert_eq!(batches.len(), 1);
        let b = &batches[0];
        let walk = Atom::new(
            "happensAt",
            vec![
                Term::compound("walk", vec![Term::constant("id1")]),
                Term::constant("1"),
            ],
        );
        assert!(b.interp.has_fact(1, &walk));
        let truth = b.truth.as_ref().unwrap();
        let move12 = Term::compound("move", vec![Term::constant("id1"), Term::constant("id2")]);
        assert!(truth.holds(&move12, 2));
    }

    #[test]
    fn unsorted_input_rejected() {
        let data = write_temp("unsorted.lp", "happensAt(a,5).\nhappensAt(b,3).\n");
        let err = load_stream(&data, None, 10).unwrap_err();
        assert!(matches!(err, LoadError::Unsorted { .. }));
    }

    #[test]
    fn csv_ingestion_matches_fact_syntax() {
        let csv = write_temp("stream.csv", "time,predicate,arg\n1,happensAt,walk(id1)\n2,close,\"id1\",\"id2\",25\n");
        let records = read_records(&csv).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(
            records[0].fact,
            Atom::new(
                "happensAt",
                vec![
                    Term::compound("walk", vec![Term::constant("id1")]),
                    Term::constant("1")
                ]
            )
        );
        assert_eq!(records[1].fact.predicate, "close");
        assert_eq!(records[1].fact.args.len(), 4);
    }

    #[test]
    fn annotation_state_includes_window_start() {
        let records: Vec<StreamRecord> = (0..4).map(|t| record("e", t)).collect();
        let f = Term::constant("f");
        let annotations: Vec<AnnotationRecord> = (2..=5)
            .map(|t| AnnotationRecord {
                time: t,
                fluent: f.clone(),
            })
            .collect();
        let batches = build_batches(&records, Some(&annotations), 2);
        assert_eq!(batches.len(), 2);
        // second window [2,3]: annotated initial state at t=2
        assert!(batches[1].interp.initial_state().contains(&f));
        let truth = batches[1].truth.as_ref().unwrap();
        assert!(truth.holds(&f, 2) && truth.holds(&f, 3) && truth.holds(&f, 4));
    }
}
