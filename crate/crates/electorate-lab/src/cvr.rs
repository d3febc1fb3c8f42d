//! Cast vote record (CVR) files.
//!
//! The on-disk format is a UTF-8, `\n`-terminated CSV with header
//! `voter_id,m1,...,mN,<race ids...>`. Measure cells are `0`, `1`, or `NA`;
//! race cells are `D`, `R`, `O`, `A`, or `NA`. Simulated files contain only
//! `D`, `R`, `A` in race cells; the richer alphabet exists so externally
//! produced records (with other-party votes and missing entries) ingest
//! cleanly. Writing then reading a file reproduces it byte for byte.
//!
//! The reader and writer are hand-rolled: the format has no quoting or
//! escaping (race ids may not contain commas or newlines), so a split on
//! commas with strict token alphabets is the whole grammar, and owning the
//! code keeps error messages in terms of this schema.

use crate::electorate::{BallotRecord, Choice, MeasureResponse};
use std::io::{BufRead, Write};
use std::path::Path;
use thiserror::Error;

/// Errors from reading or writing CVR files.
#[derive(Debug, Error)]
pub enum CvrError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// A malformed input row; `line` is 1-based and counts the header.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    /// An in-memory record that does not fit the file's declared shape.
    #[error("record for voter {voter_id}: {message}")]
    RecordShape { voter_id: u64, message: String },
    #[error("race id {0:?} is not writable: {1}")]
    BadRaceId(String, String),
}

/// An in-memory CVR file: the declared column shape plus the records.
/// `records[i].choices[j]` answers `race_ids[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CvrFile {
    pub n_measures: usize,
    pub race_ids: Vec<String>,
    pub records: Vec<BallotRecord>,
}

fn measure_token(m: MeasureResponse) -> &'static str {
    match m {
        MeasureResponse::Zero => "0",
        MeasureResponse::One => "1",
        MeasureResponse::Missing => "NA",
    }
}

fn choice_token(c: Choice) -> &'static str {
    match c {
        Choice::D => "D",
        Choice::R => "R",
        Choice::O => "O",
        Choice::A => "A",
        Choice::Missing => "NA",
    }
}

fn parse_measure(token: &str) -> Option<MeasureResponse> {
    match token {
        "0" => Some(MeasureResponse::Zero),
        "1" => Some(MeasureResponse::One),
        "NA" => Some(MeasureResponse::Missing),
        _ => None,
    }
}

fn parse_choice(token: &str) -> Option<Choice> {
    match token {
        "D" => Some(Choice::D),
        "R" => Some(Choice::R),
        "O" => Some(Choice::O),
        "A" => Some(Choice::A),
        "NA" => Some(Choice::Missing),
        _ => None,
    }
}

/// True when an id would be mistaken for a measure column in the header.
fn looks_like_measure_column(id: &str) -> bool {
    id.len() >= 2
        && id.starts_with('m')
        && id[1..].chars().all(|c| c.is_ascii_digit())
}

/// Writes the file, header first, one `\n`-terminated line per record.
pub fn write_cvr<W: Write>(file: &CvrFile, mut out: W) -> Result<(), CvrError> {
    for id in &file.race_ids {
        if id.is_empty() || id.contains(|c| c == ',' || c == '\n' || c == '\r') {
            return Err(CvrError::BadRaceId(
                id.clone(),
                "empty or contains a comma or newline".into(),
            ));
        }
        if looks_like_measure_column(id) {
            return Err(CvrError::BadRaceId(
                id.clone(),
                "collides with the m<number> measure columns".into(),
            ));
        }
    }

    let mut line = String::with_capacity(16 + 4 * (file.n_measures + file.race_ids.len()));
    line.push_str("voter_id");
    for i in 1..=file.n_measures {
        line.push_str(&format!(",m{i}"));
    }
    for id in &file.race_ids {
        line.push(',');
        line.push_str(id);
    }
    line.push('\n');
    out.write_all(line.as_bytes())?;

    for record in &file.records {
        if record.measures.len() != file.n_measures {
            return Err(CvrError::RecordShape {
                voter_id: record.voter_id,
                message: format!(
                    "has {} measures, file declares {}",
                    record.measures.len(),
                    file.n_measures
                ),
            });
        }
        if record.choices.len() != file.race_ids.len() {
            return Err(CvrError::RecordShape {
                voter_id: record.voter_id,
                message: format!(
                    "has {} choices, file declares {} races",
                    record.choices.len(),
                    file.race_ids.len()
                ),
            });
        }
        line.clear();
        line.push_str(itoa(record.voter_id).as_str());
        for m in &record.measures {
            line.push(',');
            line.push_str(measure_token(*m));
        }
        for c in &record.choices {
            line.push(',');
            line.push_str(choice_token(*c));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Integer formatting without the fmt machinery; the per-record hot path.
fn itoa(mut v: u64) -> String {
    if v == 0 {
        return "0".into();
    }
    let mut buf = [0u8; 20];
    let mut i = buf.len();
    while v > 0 {
        i -= 1;
        buf[i] = b'0' + (v % 10) as u8;
        v /= 10;
    }
    String::from_utf8_lossy(&buf[i..]).into_owned()
}

/// Reads a CVR file, inferring the measure count from the maximal
/// `m1,m2,...` prefix of the header and treating the remaining columns as
/// race ids. Any malformed row fails with its 1-based line number.
pub fn read_cvr<R: BufRead>(mut input: R) -> Result<CvrFile, CvrError> {
    let mut buf = String::new();
    let n = input.read_line(&mut buf)?;
    if n == 0 {
        return Err(CvrError::Parse {
            line: 1,
            message: "empty file; expected a voter_id,m1,... header".into(),
        });
    }
    let header = buf.trim_end_matches('\n');
    let mut columns = header.split(',');
    if columns.next() != Some("voter_id") {
        return Err(CvrError::Parse {
            line: 1,
            message: format!("header must start with voter_id, got {header:?}"),
        });
    }
    let rest: Vec<String> = columns.map(str::to_owned).collect();
    let mut n_measures = 0;
    while n_measures < rest.len() && rest[n_measures] == format!("m{}", n_measures + 1) {
        n_measures += 1;
    }
    let race_ids: Vec<String> = rest[n_measures..].to_vec();
    for id in &race_ids {
        if id.is_empty() {
            return Err(CvrError::Parse {
                line: 1,
                message: "header contains an empty race id column".into(),
            });
        }
    }
    let expected_fields = 1 + n_measures + race_ids.len();

    let mut records = Vec::new();
    let mut line_no = 1;
    loop {
        buf.clear();
        let n = input.read_line(&mut buf)?;
        if n == 0 {
            break;
        }
        line_no += 1;
        let line = buf.trim_end_matches('\n');
        if line.is_empty() {
            return Err(CvrError::Parse {
                line: line_no,
                message: "blank line".into(),
            });
        }
        let mut fields = line.split(',');
        let id_token = fields.next().unwrap();
        let voter_id: u64 = id_token.parse().map_err(|_| CvrError::Parse {
            line: line_no,
            message: format!("voter_id {id_token:?} is not a nonnegative integer"),
        })?;
        let mut measures = Vec::with_capacity(n_measures);
        for i in 0..n_measures {
            let token = fields.next().ok_or_else(|| CvrError::Parse {
                line: line_no,
                message: format!("expected {expected_fields} fields, got fewer"),
            })?;
            measures.push(parse_measure(token).ok_or_else(|| CvrError::Parse {
                line: line_no,
                message: format!("measure m{} must be 0, 1, or NA, got {token:?}", i + 1),
            })?);
        }
        let mut choices = Vec::with_capacity(race_ids.len());
        for id in &race_ids {
            let token = fields.next().ok_or_else(|| CvrError::Parse {
                line: line_no,
                message: format!("expected {expected_fields} fields, got fewer"),
            })?;
            choices.push(parse_choice(token).ok_or_else(|| CvrError::Parse {
                line: line_no,
                message: format!("race {id} must be D, R, O, A, or NA, got {token:?}"),
            })?);
        }
        if fields.next().is_some() {
            return Err(CvrError::Parse {
                line: line_no,
                message: format!(
                    "expected {expected_fields} fields, got {}",
                    line.split(',').count()
                ),
            });
        }
        records.push(BallotRecord {
            voter_id,
            measures,
            choices,
        });
    }
    Ok(CvrFile {
        n_measures,
        race_ids,
        records,
    })
}

/// Writes a CVR file to a path, buffered.
pub fn write_cvr_file(file: &CvrFile, path: &Path) -> Result<(), CvrError> {
    let out = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(out);
    write_cvr(file, &mut out)?;
    out.flush()?;
    Ok(())
}

/// Reads a CVR file from a path, buffered.
pub fn read_cvr_file(path: &Path) -> Result<CvrFile, CvrError> {
    let input = std::fs::File::open(path)?;
    read_cvr(std::io::BufReader::new(input))
}
