//! Container file round trips, header inspection, and corruption handling.

use std::fs;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tt_core::{
    inspect, load_matrix, load_tensor, save_matrix, save_tensor, ContainerKind, TTMatrix,
    TTTensor, TtError,
};

#[test]
fn tensor_round_trip_preserves_everything() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.ttk");
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let t = TTTensor::random_with(&[4, 7, 3, 5], 4, || rng.gen_range(-1.0..1.0));
    save_tensor(&t, &path).unwrap();
    let back = load_tensor(&path).unwrap();
    assert_eq!(back.shape(), t.shape());
    assert_eq!(back.ranks(), t.ranks());
    for (a, b) in back.cores().iter().zip(t.cores()) {
        assert_eq!(a, b);
    }
}

#[test]
fn saving_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (p1, p2) = (dir.path().join("a.ttk"), dir.path().join("b.ttk"));
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    let t = TTTensor::random_with(&[6, 2, 8], 3, || rng.gen_range(-1.0..1.0));
    save_tensor(&t, &p1).unwrap();
    save_tensor(&t, &p2).unwrap();
    assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
}

#[test]
fn matrix_round_trip_and_inspect() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.ttk");
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    let a = TTMatrix::random_with(&[3, 5], &[4, 2], 3, || rng.gen_range(-1.0..1.0)).unwrap();
    save_matrix(&a, &path).unwrap();
    let back = load_matrix(&path).unwrap();
    assert_eq!(back.row_shape(), a.row_shape());
    assert_eq!(back.col_shape(), a.col_shape());
    for (x, y) in back.cores().iter().zip(a.cores()) {
        assert_eq!(x, y);
    }

    let info = inspect(&path).unwrap();
    assert_eq!(info.kind, ContainerKind::Matrix);
    assert_eq!(info.shape, vec![3, 5]);
    assert_eq!(info.col_shape, vec![4, 2]);
    assert_eq!(info.ranks, a.ranks());
}

#[test]
fn kind_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.ttk");
    save_tensor(&TTTensor::ones(&[3, 3]), &path).unwrap();
    assert!(matches!(
        load_matrix(&path).unwrap_err(),
        TtError::Container(_)
    ));
}

#[test]
fn corrupt_magic_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.ttk");
    save_tensor(&TTTensor::ones(&[3, 3]), &path).unwrap();
    let mut bytes = fs::read(&path).unwrap();
    bytes[0] = b'X';
    fs::write(&path, &bytes).unwrap();
    match load_tensor(&path).unwrap_err() {
        TtError::Container(msg) => assert!(msg.contains("magic")),
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn truncated_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.ttk");
    let mut rng = ChaCha8Rng::seed_from_u64(74);
    let t = TTTensor::random_with(&[5, 5, 5], 3, || rng.gen_range(-1.0..1.0));
    save_tensor(&t, &path).unwrap();
    let bytes = fs::read(&path).unwrap();
    fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
    assert!(load_tensor(&path).is_err());
}

#[test]
fn trailing_garbage_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.ttk");
    save_tensor(&TTTensor::ones(&[2, 2]), &path).unwrap();
    let mut bytes = fs::read(&path).unwrap();
    bytes.extend_from_slice(&[0u8; 4]);
    fs::write(&path, &bytes).unwrap();
    assert!(load_tensor(&path).is_err());
}
