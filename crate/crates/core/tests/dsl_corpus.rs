mod common;

use common::corpus::check_corpus;
use nfg_core::dsl::{self, ErrorClass};
use nfg_core::linalg;
use nfg_core::{Engine, Scalar};

#[test]
fn corpus_round_trips_and_diagnostics() {
    let outcome = check_corpus();
    assert!(outcome.valid + outcome.errors >= 15);
    assert!(outcome.failures.is_empty(), "{}", outcome.failures.join("\n"));
}

#[test]
fn every_error_class_is_represented() {
    let dir = common::corpus::corpus_dir().join("errors");
    let mut classes = std::collections::BTreeSet::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|x| x == "nfg") {
            let e = dsl::parse(&std::fs::read_to_string(&p).unwrap()).unwrap_err();
            classes.insert(e.class().to_string());
        }
    }
    let all = [ErrorClass::Lexical, ErrorClass::Syntax, ErrorClass::Semantic, ErrorClass::Validation];
    for c in all {
        assert!(classes.contains(&c.to_string()), "no corpus file for {c}");
    }
}

#[test]
fn corpus_documents_match_library_constructions() {
    let src = std::fs::read_to_string(common::corpus::corpus_dir().join("valid/pfaffian3.nfg")).unwrap();
    let model = dsl::load(&src).unwrap();
    let a = model.tensor("A").unwrap();
    let from_dsl = model.evaluate("pf", Engine::Planned).unwrap().unwrap();
    let from_lib = nfg_core::contraction::exterior(&linalg::pfaffian_diagram(a).unwrap(), Engine::Planned).unwrap();
    assert_eq!(from_dsl, from_lib);
    let expansion = common::pfaffian_expansion(&common::grid(a));
    assert_eq!(from_dsl.scalar_value().unwrap(), Scalar::Exact(&expansion * &common::r(48)));

    let src = std::fs::read_to_string(common::corpus::corpus_dir().join("valid/determinant.nfg")).unwrap();
    let model = dsl::load(&src).unwrap();
    assert_eq!(model.evaluate("det", Engine::Brute).unwrap().unwrap().scalar_value().unwrap(), Scalar::from(2));
}

#[test]
fn generated_pfaffian_document_round_trips() {
    // a document written from a randomly built n = 3 family member
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let a = nfg_core::suites::random_skew(&mut rng, 6);
    let values: Vec<String> = a.values().iter().map(|v| v.to_string()).collect();
    let mut src = format!("tensor A [6, 6] = [{}]\ntensor E = eps(6)\ngraph pf {{\n  vertex eps: E\n", values.join(", "));
    for k in 1..=3 {
        src.push_str(&format!("  vertex a{k}: A\n"));
    }
    for k in 1..=3 {
        src.push_str(&format!("  edge k{k}(a{k}.1, eps.{k})\n  edge l{k}(a{k}.2, eps.{})\n", 7 - k));
    }
    src.push_str("}\n");
    let doc = dsl::parse(&src).unwrap();
    let text = dsl::serialize(&doc);
    let again = dsl::parse(&text).unwrap();
    assert_eq!(again.without_spans(), doc.without_spans());
    assert_eq!(dsl::serialize(&again), text);
}
