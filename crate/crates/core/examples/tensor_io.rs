//! The SGUR tensor format and the CSV fallback.

use sgur::corpus::io::{decode_tensor, encode_tensor, parse_csv_matrix};
use sgur::corpus::{load_features, read_tensor, write_tensor};
use sgur::Matrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = Matrix::from_rows(&[vec![1.0, -0.5, 0.25], vec![0.0, 2.0, -3.0]])?;
    let bytes = encode_tensor(&m)?;
    println!("2x3 tensor is {} bytes; header {:02x?}", bytes.len(), &bytes[..16]);
    assert!(decode_tensor(&bytes)?.bitwise_eq(&m));

    let dir = std::env::temp_dir().join("sgur_tensor_example");
    std::fs::create_dir_all(&dir)?;
    write_tensor(&m, &dir.join("m.sgur"))?;
    assert!(read_tensor(&dir.join("m.sgur"))?.bitwise_eq(&m));

    std::fs::write(dir.join("m.csv"), "1,-0.5,0.25\n0,2,-3\n")?;
    let csv = load_features(&dir.join("m.csv"), "csv")?;
    assert!(csv.matrix().bitwise_eq(&m));

    for bad in ["1,2\n3\n", "1,x\n"] {
        match parse_csv_matrix(bad, std::path::Path::new("inline.csv")) {
            Ok(_) => println!("{bad:?} parsed"),
            Err(e) => println!("{bad:?} rejected: {e}"),
        }
    }
    std::fs::write(dir.join("nan.csv"), "1,nan\n")?;
    if let Err(e) = load_features(&dir.join("nan.csv"), "csv") {
        println!("non-finite features rejected: {e}");
    }
    match decode_tensor(b"SGUR\x02\0\0\0\0\0\0\0\0\0\0\0") {
        Ok(_) => unreachable!(),
        Err(e) => println!("version 2 rejected: {e}"),
    }
    Ok(())
}
