use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use netadv::commands::{pipeline, PipelineOptions, PipelineOutput};
use netadv::io::{read_batches, read_constraints, read_dataset, read_model, write_batch};
use netadv::render::{parse_report_json, report_json, severity_csv, svg_bars, SVG_FILE};
use netadv_core::attacks::AttackKind;
use netadv_core::constraints::derive_constraints;
use netadv_core::models::{Classifier, Hyperparameters, MlpConfig};

fn small_pipeline(out: &Path, seed: u64) -> PipelineOutput {
    let mut opts = PipelineOptions::new(out.to_path_buf(), seed);
    opts.synthetic = Some(500);
    opts.limit = 8;
    let small = |s| {
        Hyperparameters::Mlp(MlpConfig {
            hidden_sizes: vec![16, 8],
            epochs: 5,
            batch_size: 32,
            seed: s,
            ..Default::default()
        })
    };
    opts.models.insert("mlp".into(), small(seed));
    opts.models.insert("mlp2".into(), small(seed + 1));
    for c in &mut opts.configs {
        c.steps = c.steps.min(50);
    }
    pipeline(&opts).unwrap()
}

#[test]
fn pipeline_outputs_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let out = small_pipeline(tmp.path(), 5);
    let report_path = tmp.path().join("report/report.json");
    let text = fs::read_to_string(&report_path).unwrap();
    assert_eq!(parse_report_json(&text).unwrap(), out.report);
    assert_eq!(report_json(&out.report), text);
    assert_eq!(out.report.validity.len(), 7);
    assert_eq!(out.report.severity.len(), 7 * 6);
    assert_eq!(out.metrics.len(), 6);

    let data = read_dataset(&tmp.path().join("data")).unwrap();
    let cs = read_constraints(&tmp.path().join("constraints.json"), &data.train.schema).unwrap();
    assert_eq!(cs, derive_constraints(&data.train).unwrap());

    for name in ["mlp", "mlp2", "svm", "dt", "rf", "knn"] {
        let m = read_model(&tmp.path().join(format!("models/{name}.json"))).unwrap();
        assert_eq!(m.input_dim(), data.train.schema.dim(), "{name}");
        let again = tmp.path().join(format!("{name}.copy.json"));
        netadv::io::write_model(&again, &m).unwrap();
        assert_eq!(
            fs::read(&again).unwrap(),
            fs::read(tmp.path().join(format!("models/{name}.json"))).unwrap(),
            "{name}"
        );
    }

    let (schema, batches) = read_batches(&tmp.path().join("batches")).unwrap();
    assert_eq!(schema, data.train.schema);
    let kinds: Vec<AttackKind> = batches.iter().map(|(b, _)| b.attack.attack_kind).collect();
    assert_eq!(kinds, AttackKind::ALL);
    let (b, meta) = &batches[0];
    assert_eq!(meta.dataset_fingerprint, data.fingerprint);
    let copy = tmp.path().join("copy");
    write_batch(&copy, b, &schema, &meta.dataset_fingerprint).unwrap();
    for f in ["originals.csv", "adversarials.csv", "meta.json"] {
        let orig = tmp.path().join("batches").join(b.attack.attack_kind.id()).join(f);
        assert_eq!(fs::read(copy.join(f)).unwrap(), fs::read(orig).unwrap(), "{f}");
    }
}

#[test]
fn report_is_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    small_pipeline(a.path(), 8);
    small_pipeline(b.path(), 8);
    for f in [
        "report.json",
        "severity.csv",
        "validity.csv",
        "transfer.csv",
        "report.md",
        SVG_FILE,
    ] {
        let path = Path::new("report").join(f);
        assert_eq!(
            fs::read(a.path().join(&path)).unwrap(),
            fs::read(b.path().join(&path)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn severity_csv_header_and_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = small_pipeline(tmp.path(), 6);
    let csv = severity_csv(&out.report);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("attack,target,severity_before,severity_after,n_before,n_after")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), out.report.severity.len());
    for (row, cell) in rows.iter().zip(&out.report.severity) {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[0], cell.attack.id());
        assert_eq!(fields[1], cell.target);
        assert_eq!(fields[4].parse::<usize>().unwrap(), cell.n_before);
        assert_eq!(fields[5].parse::<usize>().unwrap(), cell.n_after);
        assert!(cell.n_after <= cell.n_before);
        match cell.severity_after {
            Some(v) => assert_eq!(fields[3], format!("{v:.2}")),
            None => assert_eq!(fields[3], "—"),
        }
    }
    assert_eq!(fs::read_to_string(tmp.path().join("report/severity.csv")).unwrap(), csv);
}

#[test]
fn svg_is_well_formed_with_one_group_per_attack() {
    let tmp = tempfile::tempdir().unwrap();
    let out = small_pipeline(tmp.path(), 7);
    let svg = svg_bars(&out.report);
    let doc = roxmltree::Document::parse(&svg).expect("well-formed XML");
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    assert_eq!(root.tag_name().namespace(), Some("http://www.w3.org/2000/svg"));
    let groups: Vec<_> = root
        .descendants()
        .filter(|n| n.has_tag_name("g") && n.attribute("class") == Some("attack"))
        .collect();
    let ids: Vec<&str> = groups.iter().map(|g| g.attribute("data-attack").unwrap()).collect();
    let expected: Vec<&str> = out.report.validity.iter().map(|v| v.attack.id()).collect();
    assert_eq!(ids, expected);

    let mut bars: BTreeMap<&str, usize> = BTreeMap::new();
    for g in &groups {
        for r in g.children().filter(|n| n.has_tag_name("rect")) {
            *bars.entry(r.attribute("class").unwrap()).or_default() += 1;
            let h: f64 = r.attribute("height").unwrap().parse().unwrap();
            assert!((0.0..=200.0).contains(&h));
        }
    }
    assert_eq!(bars, BTreeMap::from([("invalid", 7), ("valid", 7)]));
    // self-contained: no external references
    assert!(!svg.contains("href"));
    assert_eq!(
        fs::read_to_string(tmp.path().join("report").join(SVG_FILE)).unwrap(),
        svg
    );
}
