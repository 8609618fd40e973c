use std::fs;

use ser_core::error::Error;
use ser_core::model::{load_params, save_params, EmotionModel, ModelConfig, Precision};
use ser_core::tensor::Tensor;

fn config() -> ModelConfig {
    ModelConfig {
        input_samples: 96,
        conv_kernels: 5,
        gru_units: 6,
        dense_units: 9,
        precision: Precision::F64,
        seed: 3,
        ..Default::default()
    }
}

#[test]
fn saved_model_predicts_identically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.params");
    let model: EmotionModel<f32> = EmotionModel::seeded(&config()).unwrap();
    save_params(&model, &path).unwrap();
    let back: EmotionModel<f32> = load_params(&path).unwrap();
    assert_eq!(back, model);

    let x = Tensor::new(vec![96, 1], (0..96).map(|i| (i as f32 * 0.3).sin()).collect()).unwrap();
    assert_eq!(back.predict(&x).unwrap(), model.predict(&x).unwrap());
}

#[test]
fn f64_model_is_stored_at_f32() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.params");
    let model: EmotionModel<f64> = EmotionModel::seeded(&config()).unwrap();
    save_params(&model, &path).unwrap();
    let back: EmotionModel<f64> = load_params(&path).unwrap();
    for ((_, a), (_, b)) in model.net.named_params().iter().zip(back.net.named_params()) {
        for (x, y) in a.data().iter().zip(b.data()) {
            assert_eq!(*x as f32, *y as f32);
        }
    }
}

#[test]
fn damaged_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.params");
    let model: EmotionModel<f32> = EmotionModel::seeded(&config()).unwrap();
    save_params(&model, &path).unwrap();
    let bytes = fs::read(&path).unwrap();

    fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
    assert!(matches!(load_params::<f32>(&path), Err(Error::MalformedParams(_))));

    let mut extra = bytes.clone();
    extra.push(0);
    fs::write(&path, &extra).unwrap();
    assert!(matches!(load_params::<f32>(&path), Err(Error::MalformedParams(_))));

    let mut magic = bytes;
    magic[0] ^= 0xff;
    fs::write(&path, &magic).unwrap();
    assert!(matches!(load_params::<f32>(&path), Err(Error::MalformedParams(_))));

    assert!(matches!(
        load_params::<f32>(dir.path().join("absent")),
        Err(Error::Io { .. })
    ));
}
