//! On-disk formats.
//!
//! Distribution JSON carries `labels` and exactly one of `probs` or `counts`:
//!
//! ```json
//! {"labels": ["a", "b"], "probs": [0.5, 0.5]}
//! {"labels": ["a", "b"], "counts": [3, 1]}
//! ```
//!
//! Counts CSV has the header `label,count` followed by one row per label.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::{Pmf, RawUsage};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionDoc {
    labels: Vec<String>,
    probs: Option<Vec<f64>>,
    counts: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct ProbsDoc<'a> {
    labels: &'a [String],
    probs: &'a [f64],
}

/// A parsed distribution file. `raw` is set when the file held counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub pmf: Pmf,
    pub raw: Option<RawUsage>,
}

pub fn parse_distribution_json(text: &str) -> Result<Distribution> {
    let doc: DistributionDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    match (doc.probs, doc.counts) {
        (Some(probs), None) => Ok(Distribution {
            pmf: Pmf::from_probs(doc.labels, probs)?,
            raw: None,
        }),
        (None, Some(counts)) => {
            let (pmf, raw) = Pmf::from_counts(doc.labels, counts)?;
            Ok(Distribution { pmf, raw: Some(raw) })
        }
        _ => Err(Error::Parse("expected exactly one of `probs` or `counts`".into())),
    }
}

pub fn distribution_to_json(pmf: &Pmf) -> String {
    serde_json::to_string(&ProbsDoc {
        labels: pmf.labels(),
        probs: pmf.probs(),
    })
    .expect("labels and finite probabilities always serialize")
}

#[derive(Debug, Deserialize)]
struct CountRow {
    label: String,
    count: f64,
}

pub fn read_counts_csv<R: Read>(reader: R) -> Result<RawUsage> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["label", "count"] {
        return Err(Error::Parse(format!(
            "counts CSV needs the header `label,count`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut labels = Vec::new();
    let mut counts = Vec::new();
    for row in rdr.deserialize() {
        let row: CountRow = row.map_err(|e| Error::Parse(e.to_string()))?;
        labels.push(row.label);
        counts.push(row.count);
    }
    RawUsage::new(labels, counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_probs_and_counts() {
        let d = parse_distribution_json(r#"{"labels":["a","b","c","d"],"probs":[0.1,0.2,0.3,0.4]}"#).unwrap();
        assert_eq!(d.pmf.probs(), &[0.1, 0.2, 0.3, 0.4]);
        assert!(d.raw.is_none());

        let d = parse_distribution_json(r#"{"labels":["a","b"],"counts":[3,1]}"#).unwrap();
        assert_eq!(d.pmf.probs(), &[0.75, 0.25]);
        assert_eq!(d.raw.unwrap().counts(), &[3.0, 1.0]);
    }

    #[test]
    fn rejects_ambiguous_or_broken_documents() {
        for text in [
            r#"{"labels":["a","b"],"probs":[0.5,0.5],"counts":[1,1]}"#,
            r#"{"labels":["a","b"]}"#,
            r#"{"labels":["a","b"],"probs":[0.5,0.5],"extra":1}"#,
            "not json",
        ] {
            assert!(
                matches!(parse_distribution_json(text), Err(Error::Parse(_))),
                "{text}"
            );
        }
        assert!(matches!(
            parse_distribution_json(r#"{"labels":["a","b"],"probs":[0.6,0.6]}"#),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let p = Pmf::from_probs(["x", "y"], vec![0.25, 0.75]).unwrap();
        let back = parse_distribution_json(&distribution_to_json(&p)).unwrap();
        assert_eq!(back.pmf, p);
    }

    #[test]
    fn counts_csv() {
        let raw = read_counts_csv("label,count\na,1\nb,2\nc,3\nd,4\n".as_bytes()).unwrap();
        assert_eq!(raw.labels(), &["a", "b", "c", "d"]);
        assert_eq!(raw.counts(), &[1.0, 2.0, 3.0, 4.0]);
        assert!(read_counts_csv("".as_bytes()).is_err());
        assert!(read_counts_csv("name,n\na,1\nb,1\n".as_bytes()).is_err());
        assert!(read_counts_csv("label,count\na,x\nb,1\n".as_bytes()).is_err());
        assert_eq!(
            read_counts_csv("label,count\na,0\nb,0\n".as_bytes()).unwrap_err(),
            Error::AllZeroCounts
        );
    }
}
