//! Golden-file checks over `tests/corpus`.
//!
//! `valid/NAME.nfg` must parse; its canonical serialization must equal
//! `valid/NAME.golden`, reparse to the same structure and be a fixed point.
//! `valid/NAME.values` holds `EXPR JSON` lines for the exterior functions.
//! `errors/NAME.nfg` must fail with the position, class and message
//! fragment given in `errors/NAME.expected` as `LINE:COL CLASS FRAGMENT`.
//!
//! Setting `NFG_UPDATE_GOLDEN=1` rewrites the golden and values files.

use std::fs;
use std::path::{Path, PathBuf};

use nfg_core::contraction::Engine;
use nfg_core::dsl::{self, parse, serialize};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("corpus")
}

fn files(sub: &str) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = fs::read_dir(corpus_dir().join(sub))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "nfg"))
        .collect();
    out.sort();
    out
}

pub struct CorpusOutcome {
    pub valid: usize,
    pub errors: usize,
    pub failures: Vec<String>,
}

fn values_text(source: &str) -> Result<String, String> {
    let model = dsl::load(source).map_err(|e| e.to_string())?;
    let mut out = String::new();
    for name in model.graph_names().into_iter().chain(model.compound_names()) {
        let z = model.evaluate(name, Engine::Planned).unwrap().map_err(|e| e.to_string())?;
        out.push_str(&format!("{name} {z}\n"));
    }
    Ok(out)
}

pub fn check_corpus() -> CorpusOutcome {
    let update = std::env::var_os("NFG_UPDATE_GOLDEN").is_some();
    let mut failures = Vec::new();
    let valid = files("valid");
    for path in &valid {
        let name = path.file_stem().unwrap().to_string_lossy().to_string();
        let source = fs::read_to_string(path).unwrap();
        let doc = match parse(&source) {
            Ok(d) => d,
            Err(e) => {
                failures.push(format!("{name}: unexpected error {e}"));
                continue;
            }
        };
        let text = serialize(&doc);
        let golden_path = path.with_extension("golden");
        let values_path = path.with_extension("values");
        let values = match values_text(&source) {
            Ok(v) => v,
            Err(e) => {
                failures.push(format!("{name}: evaluation failed: {e}"));
                continue;
            }
        };
        if update {
            fs::write(&golden_path, &text).unwrap();
            fs::write(&values_path, &values).unwrap();
        }
        let golden = fs::read_to_string(&golden_path).unwrap_or_default();
        if text != golden {
            failures.push(format!("{name}: serialization differs from golden"));
        }
        match parse(&text) {
            Ok(again) => {
                if again.without_spans() != doc.without_spans() {
                    failures.push(format!("{name}: reparse is not structurally identical"));
                }
                if serialize(&again) != text {
                    failures.push(format!("{name}: serialization is not idempotent"));
                }
            }
            Err(e) => failures.push(format!("{name}: canonical form does not parse: {e}")),
        }
        if fs::read_to_string(&values_path).unwrap_or_default() != values {
            failures.push(format!("{name}: exterior functions differ from {}", values_path.display()));
        }
    }
    let errors = files("errors");
    for path in &errors {
        let name = path.file_stem().unwrap().to_string_lossy().to_string();
        let source = fs::read_to_string(path).unwrap();
        let expected = fs::read_to_string(path.with_extension("expected")).unwrap();
        let expected = expected.trim();
        let mut parts = expected.splitn(3, ' ');
        let (pos, class, fragment) = (parts.next().unwrap(), parts.next().unwrap(), parts.next().unwrap_or(""));
        match parse(&source) {
            Ok(_) => failures.push(format!("{name}: parsed but should fail with {expected}")),
            Err(e) => {
                let got_pos = format!("{}:{}", e.span.line, e.span.col);
                let shown = e.to_string();
                if got_pos != pos || e.class().to_string() != class || !shown.contains(fragment) {
                    failures.push(format!("{name}: expected `{expected}`, got `{shown}`"));
                }
            }
        }
    }
    CorpusOutcome { valid: valid.len(), errors: errors.len(), failures }
}
