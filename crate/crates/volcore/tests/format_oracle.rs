//! Byte-level checks of the VVL1 format against a fixture produced by an
//! independent Python writer that followed only the format documentation.

use volcore::{read_volume, write_volume, Volume};

/// 2x2x2 float32 volume, value at (x, y, z) = x + 2y + 4z, unit spacing.
/// Produced by: struct.pack of the documented header followed by the payload
/// in x-fastest order.
const PYTHON_WRITTEN: [u8; 65] = [
    0x56, 0x56, 0x4c, 0x31, 0x00, 0x02, 0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x02, 0x00,
    0x00, 0x00, 0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x80, 0x3f, 0x00,
    0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0x40,
    0x00, 0x00, 0x40, 0x40, 0x00, 0x00, 0x80, 0x40, 0x00, 0x00, 0xa0, 0x40, 0x00, 0x00, 0xc0,
    0x40, 0x00, 0x00, 0xe0, 0x40,
];

#[test]
fn reads_the_independently_written_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("fixture.vvl");
    std::fs::write(&p, PYTHON_WRITTEN).unwrap();
    let v = read_volume(&p).unwrap();
    assert_eq!(v.dims, [2, 2, 2]);
    assert_eq!(v.spacing, [1.0, 1.0, 1.0]);
    let vals = v.as_f32().unwrap();
    for z in 0..2 {
        for y in 0..2 {
            for x in 0..2 {
                assert_eq!(vals[v.index(x, y, z)], (x + 2 * y + 4 * z) as f32);
            }
        }
    }
}

#[test]
fn writes_byte_identical_to_the_independent_writer() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("ours.vvl");
    let data: Vec<f32> = (0..8).map(|i| i as f32).collect();
    let v = Volume::f32([2, 2, 2], [1.0; 3], data).unwrap();
    write_volume(&v, &p).unwrap();
    let ours = std::fs::read(&p).unwrap();
    assert_eq!(ours, PYTHON_WRITTEN);
}
