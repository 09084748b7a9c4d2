use mulberry_core::dataset::EncodingMap;
use mulberry_core::forest::{fit_forest, ForestParams};
use mulberry_core::linear::{fit_mlr, fit_ridge};
use mulberry_core::model::{
    from_json, load_model, save_model, to_json, FittedModel, ModelArtifact, ModelNormalization,
};
use mulberry_core::preprocess::NormalizationParams;
use mulberry_core::{rng, synth, Error, Matrix};
use rand::Rng;

fn random_inputs(d: usize, seed: u64) -> Matrix {
    let mut r = rng::seeded(seed);
    Matrix::from_vec(
        100,
        d,
        (0..100 * d).map(|_| r.random_range(-0.2..1.2)).collect(),
    )
    .unwrap()
}

fn artifacts() -> Vec<ModelArtifact> {
    let d = synth::generate(150, 5).unwrap();
    let cols = d.feature_columns();
    let names = d.names(&cols);
    let raw = d.numeric_matrix(&cols).unwrap();
    let train: Vec<usize> = (0..d.n_rows()).collect();
    let features = NormalizationParams::fit_matrix(&raw, &names, &train).unwrap();
    let (x, _) = features.apply_matrix(&raw).unwrap();
    let y = d.target_values().unwrap();
    let y_range = NormalizationParams::fit_matrix(
        &Matrix::from_vec(y.len(), 1, y.clone()).unwrap(),
        &["yield".into()],
        &train,
    )
    .unwrap()
    .columns
    .remove(0);
    let yz: Vec<f64> = y
        .iter()
        .map(|v| (v - y_range.min) / (y_range.max - y_range.min))
        .collect();
    let norm = ModelNormalization {
        features,
        target: Some(y_range),
    };
    let models = [
        FittedModel::Mlr(
            fit_mlr(&x, &yz)
                .unwrap()
                .with_feature_names(names.clone())
                .unwrap(),
        ),
        FittedModel::Ridge(
            fit_ridge(&x, &yz, 1.0)
                .unwrap()
                .with_feature_names(names.clone())
                .unwrap(),
        ),
        FittedModel::Forest(
            fit_forest(
                &x,
                &yz,
                &ForestParams {
                    n_trees: 100,
                    seed: 3,
                    ..Default::default()
                },
            )
            .unwrap()
            .with_feature_names(names.clone())
            .unwrap(),
        ),
    ];
    models
        .into_iter()
        .map(|model| ModelArtifact {
            model,
            target_name: "yield".into(),
            normalization: Some(norm.clone()),
            encoding: EncodingMap::default(),
        })
        .collect()
}

#[test]
fn save_load_preserves_predictions_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    for (k, a) in artifacts().into_iter().enumerate() {
        let path = dir.path().join(format!("m{k}.json"));
        let before = a.predict(&random_inputs(12, k as u64)).unwrap();
        save_model(&a, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        let after = loaded.predict(&random_inputs(12, k as u64)).unwrap();
        assert!(
            before
                .values
                .iter()
                .zip(&after.values)
                .all(|(p, q)| p.to_bits() == q.to_bits()),
            "{}",
            a.model.kind()
        );
        assert_eq!(before.clamped_cells, after.clamped_cells);
        assert_eq!(loaded, a);
    }
}

#[test]
fn save_load_save_is_byte_identical() {
    for a in artifacts() {
        let text = to_json(&a).unwrap();
        assert_eq!(to_json(&from_json(&text).unwrap()).unwrap(), text);
    }
}

#[test]
fn truncations_never_produce_a_model() {
    let text = to_json(&artifacts().remove(2)).unwrap();
    for frac in [0.01, 0.25, 0.5, 0.75, 0.999] {
        let cut = (text.len() as f64 * frac) as usize;
        let err = from_json(&text[..cut]).unwrap_err();
        assert!(
            matches!(err, Error::SchemaViolation(_)),
            "cut at {cut}: {err}"
        );
    }
}

#[test]
fn missing_file_is_reported() {
    let err = load_model(std::path::Path::new("/definitely/not/here.json")).unwrap_err();
    assert!(matches!(err, Error::FileNotFound(_)));
}
