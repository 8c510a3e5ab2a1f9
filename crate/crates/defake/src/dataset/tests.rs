use std::cell::Cell;
use std::collections::BTreeMap;
use std::rc::Rc;

use proptest::prelude::*;

use super::*;

fn write_json(dir: &std::path::Path, name: &str, content: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn text_records(texts: &[(&str, i64)]) -> Vec<SampleRecord> {
    texts
        .iter()
        .map(|(t, l)| {
            let mut fields = BTreeMap::new();
            fields.insert("text".into(), FieldValue::Str(t.to_string()));
            fields.insert("label".into(), FieldValue::Int(*l));
            SampleRecord { fields }
        })
        .collect()
}

#[test]
fn load_json_preserves_order_and_fields() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_json(
        dir.path(),
        "train.json",
        r#"[{"text": "hello world", "domain": 3, "label": 1},
            {"text": "second post", "domain": 0, "label": 0}]"#,
    );
    let records = load_json_dataset(&path, &["text", "domain", "label"]).unwrap();
    assert_eq!(records.len(), 2);
    assert_eq!(
        records[0].fields.get("text"),
        Some(&FieldValue::Str("hello world".into()))
    );
    assert_eq!(records[1].fields.get("label"), Some(&FieldValue::Int(0)));
    assert_eq!(records[0].fields.get("domain"), Some(&FieldValue::Int(3)));
}

#[test]
fn load_json_missing_label_names_element_index() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_json(
        dir.path(),
        "bad.json",
        r#"[{"text": "ok", "label": 1}, {"text": "no label here"}]"#,
    );
    let err = load_json_dataset(&path, &["text", "label"]).unwrap_err();
    match err {
        DatasetError::MissingField { index, field } => {
            assert_eq!(index, 1);
            assert_eq!(field, "label");
        }
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn load_json_rejects_non_array_and_non_integer_label() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_json(dir.path(), "obj.json", r#"{"text": "x"}"#);
    assert!(matches!(
        load_json_dataset(&path, &[]),
        Err(DatasetError::NotAnArray)
    ));
    let path = write_json(dir.path(), "floaty.json", r#"[{"text": "x", "label": 0.5}]"#);
    assert!(matches!(
        load_json_dataset(&path, &["label"]),
        Err(DatasetError::NonIntegerLabel { index: 0 })
    ));
}

#[test]
fn load_json_rejects_inconsistent_field_sets() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_json(
        dir.path(),
        "mixed.json",
        r#"[{"text": "a", "label": 0}, {"text": "b", "label": 1, "extra": 2}]"#,
    );
    assert!(matches!(
        load_json_dataset(&path, &["label"]),
        Err(DatasetError::InconsistentFields { index: 1, .. })
    ));
}

#[test]
fn tokenize_maps_pads_and_masks() {
    let vocab = Vocabulary::from_tokens(vec!["<pad>".into(), "a".into(), "b".into()]);
    let seq = reference_tokenize("a b a", &vocab, 5).unwrap();
    assert_eq!(seq.ids, vec![1, 2, 1, 0, 0]);
    assert_eq!(seq.mask, vec![1, 1, 1, 0, 0]);
}

#[test]
fn tokenize_fixed_length_and_truncation() {
    let vocab = Vocabulary::build(["tok"]);
    let seq = reference_tokenize("tok tok", &vocab, 170).unwrap();
    assert_eq!(seq.ids.len(), 170);
    assert_eq!(seq.mask.len(), 170);

    let long: String = vec!["tok"; 200].join(" ");
    let seq = reference_tokenize(&long, &vocab, 170).unwrap();
    assert_eq!(seq.ids.len(), 170);
    assert!(seq.mask.iter().all(|&m| m == 1));
}

#[test]
fn tokenize_unknown_maps_to_unk_and_is_stable() {
    let vocab = Vocabulary::build(["known words only"]);
    let a = reference_tokenize("known mystery", &vocab, 4).unwrap();
    let b = reference_tokenize("known mystery", &vocab, 4).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.ids[1], UNK_ID);
}

#[test]
fn tokenize_rejects_empty_vocabulary() {
    let vocab = Vocabulary::new();
    assert!(matches!(
        reference_tokenize("x", &vocab, 3),
        Err(DatasetError::EmptyVocabulary)
    ));
}

#[test]
fn ppm_all_white_and_known_value() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("white.ppm");
    image::write_ppm(&path, 2, 2, &[255u8; 12]).unwrap();
    let img = reference_transform(&path).unwrap();
    assert_eq!(img.pixels.dim(), (3, 2, 2));
    assert!(img.pixels.iter().all(|&v| v == 1.0));

    let path = dir.path().join("gray.ppm");
    image::write_ppm(&path, 1, 1, &[51, 51, 51]).unwrap();
    let img = reference_transform(&path).unwrap();
    assert!((img.pixels[(0, 0, 0)] - 0.2).abs() < 1e-12);
}

#[test]
fn ppm_roundtrip_matches_byte_walk_oracle() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let (w, h) = (4usize, 3usize);
    let payload: Vec<u8> = (0..w * h * 3).map(|_| rng.gen()).collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rand.ppm");
    image::write_ppm(&path, w, h, &payload).unwrap();
    let img = reference_transform(&path).unwrap();
    // independent byte-level walk of the same payload
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                let expected = payload[(y * w + x) * 3 + c] as f64 / 255.0;
                assert_eq!(img.pixels[(c, x, y)], expected);
            }
        }
    }
}

#[test]
fn ppm_rejects_bad_magic_and_dimension_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p3.ppm");
    std::fs::write(&path, b"P3\n1 1\n255\n1 2 3").unwrap();
    assert!(matches!(
        reference_transform(&path),
        Err(DatasetError::BadImage { .. })
    ));
    let path = dir.path().join("short.ppm");
    std::fs::write(&path, b"P6\n2 2\n255\n\x00\x00\x00").unwrap();
    assert!(matches!(
        reference_transform(&path),
        Err(DatasetError::BadImage { .. })
    ));
}

#[test]
fn multimodal_construction_reads_no_images() {
    let dir = tempfile::tempdir().unwrap();
    let records: Vec<SampleRecord> = (0..100)
        .map(|i| {
            let mut fields = BTreeMap::new();
            fields.insert("text".into(), FieldValue::Str(format!("post {i}")));
            fields.insert("label".into(), FieldValue::Int(i % 2));
            fields.insert(
                "image".into(),
                FieldValue::Str(dir.path().join(format!("{i}.ppm")).to_string_lossy().into()),
            );
            SampleRecord { fields }
        })
        .collect();
    let reads = Rc::new(Cell::new(0usize));
    let counter = reads.clone();
    let vocab = Vocabulary::build(records.iter().map(|r| match r.fields.get("text") {
        Some(FieldValue::Str(s)) => s.as_str(),
        _ => unreachable!(),
    }));
    let dataset = MultiModalDataset::new(
        &records,
        Some((
            "text",
            Box::new(move |t: &str| reference_tokenize(t, &vocab, 8).unwrap()),
        )),
        "image",
        Box::new(move |_path| {
            counter.set(counter.get() + 1);
            Ok(ImageTensor {
                pixels: ndarray::Array3::zeros((3, 2, 2)),
            })
        }),
    )
    .unwrap();
    assert_eq!(reads.get(), 0);

    let sample = dataset.get(5).unwrap();
    assert_eq!(reads.get(), 1);
    assert!(sample.contains_key("image"));
    assert!(sample.contains_key("token_ids"));

    // k distinct accesses -> k reads (no caching)
    for i in 0..7 {
        dataset.get(i).unwrap();
    }
    assert_eq!(reads.get(), 8);
}

#[test]
fn text_only_sample_has_no_image_key() {
    let records = text_records(&[("just text", 0), ("more text", 1)]);
    let vocab = Vocabulary::build(["just text more"]);
    let dataset = TextDataset::new(
        &records,
        Some((
            "text",
            Box::new(move |t: &str| reference_tokenize(t, &vocab, 4).unwrap()),
        )),
    )
    .unwrap();
    let sample = dataset.get(0).unwrap();
    assert!(!sample.contains_key("image"));
    assert!(matches!(
        dataset.get(2),
        Err(DatasetError::IndexOutOfRange { index: 2, size: 2 })
    ));
}

#[test]
fn transform_failure_names_the_offending_path() {
    let records: Vec<SampleRecord> = text_records(&[("x", 0)])
        .into_iter()
        .map(|mut r| {
            r.fields
                .insert("image".into(), FieldValue::Str("/nope/missing.ppm".into()));
            r
        })
        .collect();
    let dataset = MultiModalDataset::new(
        &records,
        None,
        "image",
        Box::new(|p| reference_transform(p)),
    )
    .unwrap();
    match dataset.get(0) {
        Err(DatasetError::TransformFailed { path, .. }) => {
            assert!(path.to_string_lossy().contains("missing.ppm"));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn split_sizes_follow_floor_rule() {
    let records: Vec<u32> = (0..10).collect();
    let (train, val, test) = split_data(records, (0.8, 0.1, 0.1), 0).unwrap();
    assert_eq!((train.len(), val.len(), test.len()), (8, 1, 1));
}

#[test]
fn split_is_deterministic_per_seed() {
    let a = split_data((0..50).collect::<Vec<u32>>(), (0.7, 0.2, 0.1), 42).unwrap();
    let b = split_data((0..50).collect::<Vec<u32>>(), (0.7, 0.2, 0.1), 42).unwrap();
    assert_eq!(a, b);
    let c = split_data((0..50).collect::<Vec<u32>>(), (0.7, 0.2, 0.1), 43).unwrap();
    assert_ne!(a, c);
}

#[test]
fn split_partitions_are_disjoint_with_full_union() {
    let records: Vec<u32> = (0..1000).collect();
    let (train, val, test) = split_data(records, (0.7, 0.2, 0.1), 9).unwrap();
    let mut all: Vec<u32> = train
        .iter()
        .chain(val.iter())
        .chain(test.iter())
        .cloned()
        .collect();
    all.sort_unstable();
    assert_eq!(all, (0..1000).collect::<Vec<u32>>());
    assert_eq!((train.len(), val.len(), test.len()), (700, 200, 100));
}

#[test]
fn split_rejects_bad_ratios() {
    assert!(split_data(vec![1, 2, 3], (0.5, 0.5, 0.0), 0).is_err());
    assert!(split_data(vec![1, 2, 3], (0.5, 0.4, 0.2), 0).is_err());
}

fn tiny_dataset(n: usize) -> TextDataset {
    let records: Vec<SampleRecord> = (0..n)
        .map(|i| {
            let mut fields = BTreeMap::new();
            fields.insert("text".into(), FieldValue::Str(format!("w{} w{}", i % 5, i % 3)));
            fields.insert("label".into(), FieldValue::Int((i % 2) as i64));
            fields.insert("sample_id".into(), FieldValue::Int(i as i64));
            SampleRecord { fields }
        })
        .collect();
    let vocab = Vocabulary::build(["w0 w1 w2 w3 w4"]);
    TextDataset::new(
        &records,
        Some((
            "text",
            Box::new(move |t: &str| reference_tokenize(t, &vocab, 4).unwrap()),
        )),
    )
    .unwrap()
}

#[test]
fn batch_sizes_follow_partition_arithmetic() {
    let dataset = tiny_dataset(130);
    let batches = make_batches(&dataset, 64, false, 0).unwrap();
    let sizes: Vec<usize> = batches.iter().map(|b| b.batch_size()).collect();
    assert_eq!(sizes, vec![64, 64, 2]);

    let dataset = tiny_dataset(10);
    let batches = make_batches(&dataset, 64, false, 0).unwrap();
    assert_eq!(batches.len(), 1);
    assert_eq!(batches[0].batch_size(), 10);
}

#[test]
fn unshuffled_batches_preserve_label_order() {
    let dataset = tiny_dataset(20);
    let batches = make_batches(&dataset, 7, false, 0).unwrap();
    let labels: Vec<i64> = batches.iter().flat_map(|b| b.labels().unwrap()).collect();
    assert_eq!(labels, dataset.labels().to_vec());
}

proptest! {
    #[test]
    fn batches_cover_the_dataset_exactly(
        n in 1usize..80,
        batch_size in 1usize..20,
        shuffle in proptest::bool::ANY,
        seed in 0u64..100,
    ) {
        let dataset = tiny_dataset(n);
        let batches = make_batches(&dataset, batch_size, shuffle, seed).unwrap();
        // all arrays share the leading dimension
        for batch in &batches {
            for key in batch.keys().map(|k| k.to_string()).collect::<Vec<_>>() {
                prop_assert_eq!(batch.get(&key).unwrap().shape()[0], batch.batch_size());
            }
        }
        // multiset of (sample id, label) equals the dataset's
        let mut pairs: Vec<(i64, i64)> = batches
            .iter()
            .flat_map(|b| {
                let ids = b.int("sample_id").unwrap().iter().cloned().collect::<Vec<_>>();
                let labels = b.labels().unwrap();
                ids.into_iter().zip(labels)
            })
            .collect();
        pairs.sort_unstable();
        let expected: Vec<(i64, i64)> = (0..n as i64).map(|i| (i, i % 2)).collect();
        prop_assert_eq!(pairs, expected);
    }
}
