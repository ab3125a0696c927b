//! Grant and publication tables: loading, validation, deduplication and linking.
//!
//! Grants CSV columns (header names case-insensitive): `GRANT_ID`, `AGENCY`,
//! `PROGRAM`, `DIVISION`, `FY`, `START_YEAR`, `END_YEAR`,
//! `AWARD_AMOUNT_MUSD`, `PI_IDS` (semicolon-separated), `SUMMARY`, plus the
//! optional filter columns `IS_RESEARCH` (0/1) and `RESEARCH_PROB`.
//!
//! Publications CSV columns: `PUB_ID`, `GRANT_IDS` (semicolon-separated),
//! `PUB_YEAR`, `CITATIONS`, `SJR`, `FIELD`, `JOURNAL`. `SJR`, `FIELD` and
//! `JOURNAL` cells may be empty.
//!
//! The JSONL alternative holds one object per line with the same field names
//! lowercased; list fields may be JSON arrays or semicolon-separated strings.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use regex::Regex;
use serde::Serialize;

use crate::error::{Error, Result, RowError};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Agency {
    Nsf,
    Nih,
    Other(String),
}

impl Agency {
    pub fn parse(s: &str) -> Agency {
        let t = s.trim();
        match t.to_ascii_uppercase().as_str() {
            "NSF" => Agency::Nsf,
            "NIH" => Agency::Nih,
            _ => Agency::Other(t.to_string()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            Agency::Nsf => "NSF",
            Agency::Nih => "NIH",
            Agency::Other(s) => s,
        }
    }
}

impl fmt::Display for Agency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Agency {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// One funded grant.
#[derive(Debug, Clone, PartialEq)]
pub struct GrantRecord {
    pub grant_id: String,
    pub agency: Agency,
    pub program: String,
    /// NSF division or NIH institute.
    pub division: String,
    pub fiscal_year: i32,
    pub start_year: i32,
    pub end_year: i32,
    /// Millions of dollars.
    pub award_amount: f64,
    pub pi_ids: Vec<String>,
    pub summary: String,
    /// Set by the research filter; `Some(false)` excludes the grant from scoring.
    pub is_research: Option<bool>,
    pub research_prob: Option<f64>,
}

impl GrantRecord {
    pub fn excluded(&self) -> bool {
        self.is_research == Some(false)
    }

    pub fn length_years(&self) -> i32 {
        self.end_year - self.start_year
    }
}

/// One funded article.
#[derive(Debug, Clone, PartialEq)]
pub struct PublicationRecord {
    pub pub_id: String,
    pub grant_ids: Vec<String>,
    pub pub_year: i32,
    pub citations: u64,
    pub sjr: Option<f64>,
    pub field: Option<String>,
    pub journal: String,
}

/// Citations received by one publication in one calendar year.
#[derive(Debug, Clone, PartialEq)]
pub struct CitationEvent {
    pub pub_id: String,
    pub year: i32,
    pub citations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    /// `.jsonl`/`.json` map to JSONL, everything else to CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") | Some("ndjson") => Format::Jsonl,
            _ => Format::Csv,
        }
    }
}

/// Valid records plus the rows that failed validation.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub records: Vec<T>,
    pub rejects: Vec<RowError>,
}

pub const GRANT_COLUMNS: [&str; 10] = [
    "GRANT_ID",
    "AGENCY",
    "PROGRAM",
    "DIVISION",
    "FY",
    "START_YEAR",
    "END_YEAR",
    "AWARD_AMOUNT_MUSD",
    "PI_IDS",
    "SUMMARY",
];

pub const PUBLICATION_COLUMNS: [&str; 7] =
    ["PUB_ID", "GRANT_IDS", "PUB_YEAR", "CITATIONS", "SJR", "FIELD", "JOURNAL"];
const PUBLICATION_REQUIRED: [&str; 4] = ["PUB_ID", "GRANT_IDS", "PUB_YEAR", "CITATIONS"];

const EVENT_COLUMNS: [&str; 3] = ["PUB_ID", "YEAR", "CITATIONS"];

// Uppercased column name -> cell text.
type Row = HashMap<String, String>;

fn read_rows(path: &Path, format: Format, required: &[&str]) -> Result<Vec<(usize, std::result::Result<Row, String>)>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    match format {
        Format::Csv => read_csv_rows(path, required),
        Format::Jsonl => read_jsonl_rows(path),
    }
}

fn read_csv_rows(path: &Path, required: &[&str]) -> Result<Vec<(usize, std::result::Result<Row, String>)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_path(path)?;
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_ascii_uppercase()).collect();
    for col in required {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::MissingColumn((*col).to_string()));
        }
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        match rec {
            Ok(rec) => {
                let line = rec.position().map_or(0, |p| p.line() as usize);
                if rec.len() != headers.len() {
                    out.push((line, Err(format!("expected {} fields, found {}", headers.len(), rec.len()))));
                    continue;
                }
                let row: Row = headers.iter().cloned().zip(rec.iter().map(str::to_string)).collect();
                out.push((line, Ok(row)));
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                out.push((line, Err(e.to_string())));
            }
        }
    }
    Ok(out)
}

fn json_cell(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::Null => String::new(),
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Bool(b) => if *b { "1".into() } else { "0".into() },
        serde_json::Value::Array(items) => items.iter().map(json_cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

fn read_jsonl_rows(path: &Path) -> Result<Vec<(usize, std::result::Result<Row, String>)>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<serde_json::Value>(&line)
            .map_err(|e| e.to_string())
            .and_then(|v| match v {
                serde_json::Value::Object(map) => {
                    Ok(map.iter().map(|(k, v)| (k.to_ascii_uppercase(), json_cell(v))).collect::<Row>())
                }
                _ => Err("line is not a JSON object".to_string()),
            });
        out.push((i + 1, parsed));
    }
    Ok(out)
}

fn field<'a>(row: &'a Row, name: &str) -> std::result::Result<&'a str, String> {
    row.get(name).map(|s| s.trim()).ok_or_else(|| format!("missing field {}", name.to_ascii_lowercase()))
}

fn parse_int(row: &Row, name: &str) -> std::result::Result<i64, String> {
    let s = field(row, name)?;
    s.parse::<i64>().map_err(|_| format!("{name}: invalid integer '{s}'"))
}

fn parse_year(row: &Row, name: &str) -> std::result::Result<i32, String> {
    let y = parse_int(row, name)?;
    if !(1900..=2100).contains(&y) {
        return Err(format!("{name} {y} outside [1900, 2100]"));
    }
    Ok(y as i32)
}

fn parse_real(row: &Row, name: &str) -> std::result::Result<f64, String> {
    let s = field(row, name)?;
    s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| format!("{name}: invalid number '{s}'"))
}

fn split_list(s: &str) -> Vec<String> {
    s.split(';').map(str::trim).filter(|t| !t.is_empty()).map(str::to_string).collect()
}

fn parse_flag(s: &str) -> std::result::Result<Option<bool>, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "" => Ok(None),
        "1" | "true" => Ok(Some(true)),
        "0" | "false" => Ok(Some(false)),
        other => Err(format!("IS_RESEARCH: invalid flag '{other}'")),
    }
}

fn parse_grant(row: &Row) -> std::result::Result<GrantRecord, String> {
    let grant_id = field(row, "GRANT_ID")?.to_string();
    if grant_id.is_empty() {
        return Err("empty grant_id".into());
    }
    let award_amount = parse_real(row, "AWARD_AMOUNT_MUSD")?;
    if award_amount < 0.0 {
        return Err("award_amount < 0".into());
    }
    let pi_ids = split_list(field(row, "PI_IDS")?);
    if pi_ids.is_empty() {
        return Err("no PI ids".into());
    }
    let is_research = parse_flag(row.get("IS_RESEARCH").map_or("", String::as_str))?;
    let research_prob = match row.get("RESEARCH_PROB").map(|s| s.trim()) {
        None | Some("") => None,
        Some(_) => Some(parse_real(row, "RESEARCH_PROB")?),
    };
    let summary = row.get("SUMMARY").cloned().ok_or("missing field summary")?;
    if summary.trim().is_empty() && is_research != Some(false) {
        return Err("empty summary on a non-excluded grant".into());
    }
    Ok(GrantRecord {
        grant_id,
        agency: Agency::parse(field(row, "AGENCY")?),
        program: field(row, "PROGRAM")?.to_string(),
        division: field(row, "DIVISION")?.to_string(),
        fiscal_year: parse_year(row, "FY")?,
        start_year: parse_year(row, "START_YEAR")?,
        end_year: parse_year(row, "END_YEAR")?,
        award_amount,
        pi_ids,
        summary,
        is_research,
        research_prob,
    })
}

fn parse_publication(row: &Row) -> std::result::Result<PublicationRecord, String> {
    let pub_id = field(row, "PUB_ID")?.to_string();
    if pub_id.is_empty() {
        return Err("empty pub_id".into());
    }
    let grant_ids = split_list(field(row, "GRANT_IDS")?);
    if grant_ids.is_empty() {
        return Err("no grant ids".into());
    }
    let citations = parse_int(row, "CITATIONS")?;
    if citations < 0 {
        return Err("citations < 0".into());
    }
    let sjr = match row.get("SJR").map(|s| s.trim()) {
        None | Some("") => None,
        Some(_) => {
            let v = parse_real(row, "SJR")?;
            if v < 0.0 {
                return Err("sjr < 0".into());
            }
            Some(v)
        }
    };
    let field_label = row.get("FIELD").map(|s| s.trim().to_string()).filter(|s| !s.is_empty());
    Ok(PublicationRecord {
        pub_id,
        grant_ids,
        pub_year: parse_year(row, "PUB_YEAR")?,
        citations: citations as u64,
        sjr,
        field: field_label,
        journal: row.get("JOURNAL").map(|s| s.trim().to_string()).unwrap_or_default(),
    })
}

fn load_with<T>(
    path: &Path,
    format: Format,
    required: &[&str],
    parse: impl Fn(&Row) -> std::result::Result<T, String>,
) -> Result<Loaded<T>> {
    let mut records = Vec::new();
    let mut rejects = Vec::new();
    for (line, row) in read_rows(path, format, required)? {
        match row.and_then(|r| parse(&r)) {
            Ok(rec) => records.push(rec),
            Err(reason) => rejects.push(RowError { line, reason }),
        }
    }
    Ok(Loaded { records, rejects })
}

pub fn load_grants(path: &Path, format: Format) -> Result<Loaded<GrantRecord>> {
    load_with(path, format, &GRANT_COLUMNS, parse_grant)
}

pub fn load_publications(path: &Path, format: Format) -> Result<Loaded<PublicationRecord>> {
    load_with(path, format, &PUBLICATION_REQUIRED, parse_publication)
}

pub fn load_citation_events(path: &Path) -> Result<Loaded<CitationEvent>> {
    load_with(path, Format::from_path(path), &EVENT_COLUMNS, |row| {
        let citations = parse_int(row, "CITATIONS")?;
        if citations < 0 {
            return Err("citations < 0".into());
        }
        Ok(CitationEvent {
            pub_id: field(row, "PUB_ID")?.to_string(),
            year: parse_year(row, "YEAR")?,
            citations: citations as u64,
        })
    })
}

pub fn write_grants_csv<W: Write>(out: W, grants: &[GrantRecord]) -> Result<()> {
    let with_filter = grants.iter().any(|g| g.is_research.is_some() || g.research_prob.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = GRANT_COLUMNS.to_vec();
    if with_filter {
        header.extend(["IS_RESEARCH", "RESEARCH_PROB"]);
    }
    w.write_record(&header)?;
    for g in grants {
        let mut rec = vec![
            g.grant_id.clone(),
            g.agency.to_string(),
            g.program.clone(),
            g.division.clone(),
            g.fiscal_year.to_string(),
            g.start_year.to_string(),
            g.end_year.to_string(),
            g.award_amount.to_string(),
            g.pi_ids.join(";"),
            g.summary.clone(),
        ];
        if with_filter {
            rec.push(g.is_research.map_or(String::new(), |b| u8::from(b).to_string()));
            rec.push(g.research_prob.map_or(String::new(), |p| p.to_string()));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_publications_csv<W: Write>(out: W, pubs: &[PublicationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PUBLICATION_COLUMNS)?;
    for p in pubs {
        w.write_record([
            p.pub_id.clone(),
            p.grant_ids.join(";"),
            p.pub_year.to_string(),
            p.citations.to_string(),
            p.sjr.map_or(String::new(), |v| v.to_string()),
            p.field.clone().unwrap_or_default(),
            p.journal.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_citation_events_csv<W: Write>(out: W, events: &[CitationEvent]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EVENT_COLUMNS)?;
    for e in events {
        w.write_record([e.pub_id.clone(), e.year.to_string(), e.citations.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Sidecar rejects file: `line,reason`.
pub fn write_rejects_csv<W: Write>(out: W, rejects: &[RowError]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["line", "reason"])?;
    for r in rejects {
        w.write_record([r.line.to_string(), r.reason.clone()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KeyColumn {
    #[default]
    GrantId,
    /// Identical summaries, e.g. the per-institution copies of a collaborative award.
    Summary,
}

/// Grouping key for duplicate grant records: `(agency, normalized column value)`.
#[derive(Debug, Clone, Default)]
pub struct DedupeKey {
    pub column: KeyColumn,
    /// Matches are deleted from the column value before comparison, e.g.
    /// `-\d{2}[A-Z]?\d*$` strips NIH support-year suffixes.
    pub strip_suffix: Option<Regex>,
}

impl DedupeKey {
    pub fn key(&self, g: &GrantRecord) -> (Agency, String) {
        let raw = match self.column {
            KeyColumn::GrantId => g.grant_id.as_str(),
            KeyColumn::Summary => g.summary.trim(),
        };
        let base = match &self.strip_suffix {
            Some(re) => re.replace_all(raw, "").into_owned(),
            None => raw.to_string(),
        };
        (g.agency.clone(), base)
    }
}

/// Keeps the earliest-fiscal-year record of every duplicate group; ties go to
/// the first occurrence and survivors keep their input order.
pub fn dedupe_earliest(grants: &[GrantRecord], key: &DedupeKey) -> Vec<GrantRecord> {
    let mut best: HashMap<(Agency, String), usize> = HashMap::new();
    for (i, g) in grants.iter().enumerate() {
        best.entry(key.key(g))
            .and_modify(|b| {
                if g.fiscal_year < grants[*b].fiscal_year {
                    *b = i;
                }
            })
            .or_insert(i);
    }
    let mut keep: Vec<usize> = best.into_values().collect();
    keep.sort_unstable();
    keep.into_iter().map(|i| grants[i].clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Orphan {
    pub pub_id: String,
    pub grant_id: String,
}

/// Publications lacking a variable some analysis needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Coverage {
    pub publications: usize,
    pub missing_sjr: usize,
    pub missing_field: usize,
}

/// Grants and publications with a bidirectional funding index.
#[derive(Debug, Clone)]
pub struct LinkedDataset {
    pub grants: Vec<GrantRecord>,
    pub publications: Vec<PublicationRecord>,
    pub grant_index: HashMap<String, usize>,
    /// Publication indices per grant index.
    pub pubs_by_grant: Vec<Vec<usize>>,
    /// Resolved grant indices per publication index, in acknowledgement order.
    pub grants_by_pub: Vec<Vec<usize>>,
    pub orphans: Vec<Orphan>,
    /// Publications with at least one unresolved grant reference.
    pub orphan_publications: usize,
    /// Later rows repeating an already-seen `pub_id`; dropped.
    pub duplicate_publications: usize,
    pub coverage: Coverage,
}

impl LinkedDataset {
    pub fn grant(&self, grant_id: &str) -> Option<&GrantRecord> {
        self.grant_index.get(grant_id).map(|&i| &self.grants[i])
    }
}

/// Builds the grant→publication index. A publication funded by several
/// grants is listed under each of them.
pub fn link(grants: Vec<GrantRecord>, pubs: Vec<PublicationRecord>) -> LinkedDataset {
    let mut grant_index = HashMap::with_capacity(grants.len());
    for (i, g) in grants.iter().enumerate() {
        grant_index.entry(g.grant_id.clone()).or_insert(i);
    }
    let mut seen_pubs = HashSet::new();
    let mut publications = Vec::with_capacity(pubs.len());
    let mut duplicate_publications = 0;
    for p in pubs {
        if seen_pubs.insert(p.pub_id.clone()) {
            publications.push(p);
        } else {
            duplicate_publications += 1;
        }
    }
    let mut pubs_by_grant = vec![Vec::new(); grants.len()];
    let mut grants_by_pub = Vec::with_capacity(publications.len());
    let mut orphans = Vec::new();
    let mut orphan_publications = 0;
    let mut coverage = Coverage { publications: publications.len(), ..Default::default() };
    for (pi, p) in publications.iter().enumerate() {
        let mut resolved: Vec<usize> = Vec::new();
        let mut orphaned = false;
        for gid in &p.grant_ids {
            match grant_index.get(gid) {
                Some(&gi) => {
                    if !resolved.contains(&gi) {
                        resolved.push(gi);
                        pubs_by_grant[gi].push(pi);
                    }
                }
                None => {
                    orphaned = true;
                    orphans.push(Orphan { pub_id: p.pub_id.clone(), grant_id: gid.clone() });
                }
            }
        }
        orphan_publications += usize::from(orphaned);
        coverage.missing_sjr += usize::from(p.sjr.is_none());
        coverage.missing_field += usize::from(p.field.is_none());
        grants_by_pub.push(resolved);
    }
    LinkedDataset {
        grants,
        publications,
        grant_index,
        pubs_by_grant,
        grants_by_pub,
        orphans,
        orphan_publications,
        duplicate_publications,
        coverage,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn grant(id: &str, fy: i32) -> GrantRecord {
        GrantRecord {
            grant_id: id.into(),
            agency: Agency::Nsf,
            program: "STD".into(),
            division: "PHY".into(),
            fiscal_year: fy,
            start_year: fy,
            end_year: fy + 3,
            award_amount: 0.3,
            pi_ids: vec!["p1".into()],
            summary: "some summary".into(),
            is_research: None,
            research_prob: None,
        }
    }

    fn publication(id: &str, grants: &[&str]) -> PublicationRecord {
        PublicationRecord {
            pub_id: id.into(),
            grant_ids: grants.iter().map(|s| s.to_string()).collect(),
            pub_year: 2012,
            citations: 3,
            sjr: Some(1.0),
            field: Some("physics".into()),
            journal: "J".into(),
        }
    }

    fn write_tmp(contents: &str, ext: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    const HEADER: &str = "grant_id,agency,program,division,fy,start_year,end_year,award_amount_musd,pi_ids,summary\n";

    #[test]
    fn three_clean_rows() {
        let csv = format!(
            "{HEADER}A,NSF,STD,PHY,2010,2010,2013,0.5,p1;p2,gravitational waves\n\
             B,NIH,R01,NCI,2011,2011,2016,1.2,p3,cancer genomics\n\
             C,NSF,EAGER,CHE,2012,2012,2014,0.1,p4,\"catalysis, surfaces\"\n"
        );
        let f = write_tmp(&csv, ".csv");
        let loaded = load_grants(f.path(), Format::Csv).unwrap();
        assert_eq!(loaded.records.len(), 3);
        assert!(loaded.rejects.is_empty());
        assert_eq!(loaded.records[0].pi_ids, vec!["p1", "p2"]);
        assert_eq!(loaded.records[1].agency, Agency::Nih);
        assert_eq!(loaded.records[2].summary, "catalysis, surfaces");
    }

    #[test]
    fn negative_award_is_rejected() {
        let csv = format!("{HEADER}A,NSF,STD,PHY,2010,2010,2013,-0.5,p1,text\nB,NSF,STD,PHY,2010,2010,2013,0.5,p1,text\n");
        let f = write_tmp(&csv, ".csv");
        let loaded = load_grants(f.path(), Format::Csv).unwrap();
        assert_eq!(loaded.records.len(), 1);
        assert_eq!(loaded.rejects, vec![RowError { line: 2, reason: "award_amount < 0".into() }]);
    }

    #[test]
    fn missing_summary_column() {
        let f = write_tmp("grant_id,agency,program,division,fy,start_year,end_year,award_amount_musd,pi_ids\n", ".csv");
        match load_grants(f.path(), Format::Csv) {
            Err(Error::MissingColumn(c)) => assert_eq!(c, "SUMMARY"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_grants(Path::new("/nonexistent/grants.csv"), Format::Csv),
            Err(Error::MissingFile(_))
        ));
    }

    #[test]
    fn row_errors_carry_line_numbers() {
        let csv = format!("{HEADER}A,NSF,STD,PHY,20x0,2010,2013,0.5,p1,t\nB,NSF,STD,PHY,2010,2010,2013,0.5,,t\nC,NSF,STD,PHY,2010\n");
        let f = write_tmp(&csv, ".csv");
        let loaded = load_grants(f.path(), Format::Csv).unwrap();
        let lines: Vec<usize> = loaded.rejects.iter().map(|r| r.line).collect();
        assert_eq!(lines, vec![2, 3, 4]);
    }

    #[test]
    fn empty_summary_only_when_excluded() {
        let csv = "grant_id,agency,program,division,fy,start_year,end_year,award_amount_musd,pi_ids,summary,is_research\n\
                   A,NSF,STD,PHY,2010,2010,2013,0.5,p1,,0\nB,NSF,STD,PHY,2010,2010,2013,0.5,p1,,\n";
        let f = write_tmp(csv, ".csv");
        let loaded = load_grants(f.path(), Format::Csv).unwrap();
        assert_eq!(loaded.records.len(), 1);
        assert!(loaded.records[0].excluded());
        assert_eq!(loaded.rejects.len(), 1);
    }

    #[test]
    fn jsonl_grants_and_publications() {
        let g = r#"{"grant_id":"A","agency":"nsf","program":"STD","division":"PHY","fy":2010,"start_year":2010,"end_year":2012,"award_amount_musd":0.25,"pi_ids":["p1","p2"],"summary":"x y"}
{"grant_id":"B","agency":"NIH","program":"R01","division":"NCI","fy":2011,"start_year":2011,"end_year":2015,"award_amount_musd":1,"pi_ids":"p3","summary":"z"}
not json
"#;
        let f = write_tmp(g, ".jsonl");
        let loaded = load_grants(f.path(), Format::from_path(f.path())).unwrap();
        assert_eq!(loaded.records.len(), 2);
        assert_eq!(loaded.records[0].pi_ids, vec!["p1", "p2"]);
        assert_eq!(loaded.rejects[0].line, 3);

        let p = r#"{"pub_id":"10.1/x","grant_ids":["A"],"pub_year":2012,"citations":4,"sjr":null,"field":"physics","journal":"PRL"}"#;
        let f = write_tmp(p, ".jsonl");
        let loaded = load_publications(f.path(), Format::Jsonl).unwrap();
        assert_eq!(loaded.records[0].sjr, None);
        assert_eq!(loaded.records[0].citations, 4);
    }

    #[test]
    fn csv_writer_round_trips() {
        let mut gs = vec![grant("A", 2010), grant("B", 2011)];
        gs[1].summary = "with, comma and \"quotes\"".into();
        let mut buf = Vec::new();
        write_grants_csv(&mut buf, &gs).unwrap();
        let f = write_tmp(std::str::from_utf8(&buf).unwrap(), ".csv");
        assert_eq!(load_grants(f.path(), Format::Csv).unwrap().records, gs);

        let ps = vec![publication("P1", &["A", "B"]), PublicationRecord { sjr: None, field: None, ..publication("P2", &["A"]) }];
        let mut buf = Vec::new();
        write_publications_csv(&mut buf, &ps).unwrap();
        let f = write_tmp(std::str::from_utf8(&buf).unwrap(), ".csv");
        assert_eq!(load_publications(f.path(), Format::Csv).unwrap().records, ps);
    }

    #[test]
    fn dedupe_keeps_earliest() {
        let gs = vec![grant("X", 2011), grant("Y", 2010), grant("X", 2009)];
        let out = dedupe_earliest(&gs, &DedupeKey::default());
        assert_eq!(out.iter().map(|g| (g.grant_id.as_str(), g.fiscal_year)).collect::<Vec<_>>(), vec![("Y", 2010), ("X", 2009)]);
    }

    #[test]
    fn dedupe_tie_keeps_first() {
        let mut a = grant("X", 2010);
        a.summary = "first".into();
        let mut b = grant("X", 2010);
        b.summary = "second".into();
        let out = dedupe_earliest(&[a, b], &DedupeKey::default());
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].summary, "first");
    }

    #[test]
    fn dedupe_identity_without_duplicates() {
        let gs = vec![grant("A", 2012), grant("B", 2010), grant("C", 2011)];
        assert_eq!(dedupe_earliest(&gs, &DedupeKey::default()), gs);
    }

    #[test]
    fn dedupe_strips_continuation_suffix() {
        let key = DedupeKey { column: KeyColumn::GrantId, strip_suffix: Some(Regex::new(r"-\d{2}$").unwrap()) };
        let gs = vec![grant("R01CA1234-02", 2011), grant("R01CA1234-01", 2010), grant("R01CA9999-01", 2010)];
        let out = dedupe_earliest(&gs, &key);
        let ids: Vec<&str> = out.iter().map(|g| g.grant_id.as_str()).collect();
        assert_eq!(ids, vec!["R01CA1234-01", "R01CA9999-01"]);
    }

    #[test]
    fn dedupe_by_summary_respects_agency() {
        let key = DedupeKey { column: KeyColumn::Summary, strip_suffix: None };
        let mut nih = grant("B", 2010);
        nih.agency = Agency::Nih;
        let gs = vec![grant("A", 2010), nih, grant("C", 2010)];
        let out = dedupe_earliest(&gs, &key);
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn link_builds_index() {
        let ds = link(vec![grant("A", 2010)], vec![publication("p1", &["A"]), publication("p2", &["A"])]);
        assert_eq!(ds.pubs_by_grant[0], vec![0, 1]);
        assert_eq!(ds.orphan_publications, 0);
    }

    #[test]
    fn link_reports_orphans() {
        let ds = link(vec![grant("A", 2010)], vec![publication("p1", &["Z"])]);
        assert_eq!(ds.orphan_publications, 1);
        assert_eq!(ds.orphans, vec![Orphan { pub_id: "p1".into(), grant_id: "Z".into() }]);
    }

    #[test]
    fn link_multi_grant_publication() {
        let ds = link(vec![grant("A", 2010), grant("B", 2010)], vec![publication("p1", &["A", "B", "A"])]);
        assert_eq!(ds.pubs_by_grant, vec![vec![0], vec![0]]);
        assert_eq!(ds.grants_by_pub, vec![vec![0, 1]]);
    }

    #[test]
    fn link_coverage_and_duplicates() {
        let mut p2 = publication("p2", &["A"]);
        p2.sjr = None;
        let ds = link(vec![grant("A", 2010)], vec![publication("p1", &["A"]), p2, publication("p1", &["A"])]);
        assert_eq!(ds.duplicate_publications, 1);
        assert_eq!(ds.coverage, Coverage { publications: 2, missing_sjr: 1, missing_field: 0 });
    }
}
