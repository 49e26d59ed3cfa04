//! Question files: SWAG CSV, HellaSWAG JSON lines and a generic JSON-lines
//! schema `{id, context, choices, gold?}`.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("unknown dataset format `{0}` (expected swag, hellaswag or generic)")]
    UnknownFormat(String),
    #[error("record {index}: {reason}")]
    MalformedRecord { index: usize, reason: String },
    #[error("question `{0}` has no gold label")]
    MissingGold(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn malformed(index: usize, reason: impl Into<String>) -> DataError {
    DataError::MalformedRecord {
        index,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionInstance {
    pub id: String,
    pub context: String,
    pub choices: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<usize>,
}

impl QuestionInstance {
    pub fn validate(&self) -> Result<(), String> {
        if self.choices.len() < 2 {
            return Err(format!("needs at least 2 choices, has {}", self.choices.len()));
        }
        match self.gold {
            Some(g) if g >= self.choices.len() => {
                Err(format!("gold {g} out of range for {} choices", self.choices.len()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    Swag,
    HellaSwag,
    Generic,
}

impl FromStr for DatasetFormat {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "swag" => Ok(DatasetFormat::Swag),
            "hellaswag" => Ok(DatasetFormat::HellaSwag),
            "generic" | "jsonl" => Ok(DatasetFormat::Generic),
            _ => Err(DataError::UnknownFormat(s.to_string())),
        }
    }
}

impl fmt::Display for DatasetFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetFormat::Swag => "swag",
            DatasetFormat::HellaSwag => "hellaswag",
            DatasetFormat::Generic => "generic",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    /// For SWAG, use only the partial second sentence as context instead
    /// of the whole start phrase.
    pub swag_sent2_only: bool,
}

pub fn load_dataset(
    path: &Path,
    format: DatasetFormat,
    opts: &LoadOptions,
) -> Result<Vec<QuestionInstance>, DataError> {
    read_dataset(BufReader::new(File::open(path)?), format, opts)
}

pub fn read_dataset<R: BufRead>(
    reader: R,
    format: DatasetFormat,
    opts: &LoadOptions,
) -> Result<Vec<QuestionInstance>, DataError> {
    let questions = match format {
        DatasetFormat::Swag => read_swag(reader, opts)?,
        DatasetFormat::HellaSwag => read_json_lines(reader, hellaswag_record)?,
        DatasetFormat::Generic => read_json_lines(reader, |v, _| {
            serde_json::from_value::<QuestionInstance>(v).map_err(|e| e.to_string())
        })?,
    };
    Ok(questions)
}

fn read_json_lines<R: BufRead>(
    reader: R,
    convert: impl Fn(Value, usize) -> Result<QuestionInstance, String>,
) -> Result<Vec<QuestionInstance>, DataError> {
    let mut out = Vec::new();
    let mut index = 0;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let q = serde_json::from_str::<Value>(&line)
            .map_err(|e| e.to_string())
            .and_then(|v| convert(v, index))
            .and_then(|q| q.validate().map(|_| q))
            .map_err(|reason| malformed(index, reason))?;
        out.push(q);
        index += 1;
    }
    Ok(out)
}

fn hellaswag_record(v: Value, index: usize) -> Result<QuestionInstance, String> {
    let id = match v.get("ind") {
        Some(Value::Number(n)) => n.to_string(),
        Some(Value::String(s)) => s.clone(),
        _ => format!("hellaswag-{index}"),
    };
    let context = v
        .get("ctx")
        .and_then(Value::as_str)
        .ok_or("missing string field `ctx`")?
        .to_string();
    let choices = v
        .get("endings")
        .and_then(Value::as_array)
        .ok_or("missing array field `endings`")?
        .iter()
        .map(|e| e.as_str().map(str::to_string).ok_or("non-string ending"))
        .collect::<Result<Vec<_>, _>>()?;
    let gold = match v.get("label") {
        None | Some(Value::Null) => None,
        Some(Value::Number(n)) => Some(n.as_u64().ok_or("label is not a non-negative integer")? as usize),
        Some(Value::String(s)) if s.is_empty() => None,
        Some(Value::String(s)) => Some(s.parse().map_err(|_| format!("bad label `{s}`"))?),
        Some(_) => return Err("label has unexpected type".into()),
    };
    Ok(QuestionInstance {
        id,
        context,
        choices,
        gold,
    })
}

fn read_swag<R: Read>(reader: R, opts: &LoadOptions) -> Result<Vec<QuestionInstance>, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| malformed(0, format!("header: {e}")))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let need = |name: &str| col(name).ok_or_else(|| malformed(0, format!("missing column `{name}`")));

    let startphrase = col("startphrase");
    let sent1 = col("sent1");
    let sent2 = need("sent2")?;
    if startphrase.is_none() && sent1.is_none() {
        return Err(malformed(0, "missing column `startphrase` or `sent1`"));
    }
    let endings: Vec<usize> = (0..4)
        .map(|i| need(&format!("ending{i}")))
        .collect::<Result<_, _>>()?;
    let label = col("label");
    let fold = col("fold-ind");

    let mut out = Vec::new();
    for (index, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| malformed(index, e.to_string()))?;
        let field = |i: usize| row.get(i).unwrap_or("").to_string();
        let context = if opts.swag_sent2_only {
            field(sent2)
        } else if let Some(sp) = startphrase {
            field(sp)
        } else {
            format!("{} {}", field(sent1.expect("checked")), field(sent2))
        };
        let gold = match label.map(field) {
            None => None,
            Some(s) if s.trim().is_empty() => None,
            Some(s) => Some(
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| malformed(index, format!("bad label `{s}`")))?,
            ),
        };
        let id = fold
            .map(field)
            .filter(|f| !f.is_empty())
            .unwrap_or_else(|| format!("swag-{index}"));
        let q = QuestionInstance {
            id,
            context,
            choices: endings.iter().map(|&i| field(i)).collect(),
            gold,
        };
        q.validate().map_err(|r| malformed(index, r))?;
        out.push(q);
    }
    Ok(out)
}
