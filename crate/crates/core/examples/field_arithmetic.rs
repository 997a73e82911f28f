// Finite field arithmetic and matrix rank over the supported fields.

use std::error::Error;

use gossipbench::gfield::{Field, FieldKind, GfMatrix, GfVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let f = Field::gf256();
    let (a, b) = (f.element(0x53), f.element(0xCA));
    println!("0x53 * 0xCA = {:#04x}", f.mul(a, b).value());
    println!("inverse of 0x53 = {:#04x}", f.inv(a)?.value());
    println!("0x53 + 0xCA = {:#04x}", f.add(a, b).value());
    assert!(f.inv(f.element(0)).is_err());

    for kind in ["gf2", "gf16", "gf7", "gf65521"] {
        let kind: FieldKind = kind.parse()?;
        let field = Field::new(kind)?;
        let x = field.element(3 % field.order());
        println!("{kind}: order {}, 3^-1 = {}", field.order(), field.inv(x)?.value());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rows: Vec<GfVector> = (0..3).map(|_| f.random_vector(4, &mut rng)).collect();
    let mut m = GfMatrix::from_rows(4, rows.clone())?;
    // The sum of the first two rows adds nothing to the span.
    let mut dependent = rows[0].clone();
    f.axpy(&mut dependent, f.element(1), &rows[1])?;
    m.push_row(dependent)?;
    println!("rank of 4 rows, one dependent: {}", f.rank(&m));
    println!("identity(5) rank: {}", f.rank(&GfMatrix::identity(5)));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
