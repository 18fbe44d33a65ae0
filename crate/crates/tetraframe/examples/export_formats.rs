//! Checkpoint, CSV and VTK output of a small field.

use tetraframe::field::{BcMode, FieldParams, Target, TensorField};
use tetraframe::grid::{build_domain, Shape};
use tetraframe::io::checkpoint::{read_checkpoint, write_checkpoint};
use tetraframe::io::export::{read_csv, write_csv, write_vtk};
use tetraframe::seed::{seed_field, SeedSpec};

fn main() -> tetraframe::Result<()> {
    let dir = std::env::temp_dir().join("tetraframe_export_example");
    std::fs::create_dir_all(&dir)?;
    let domain = build_domain(&Shape::Disk { radius: 1.0 }, 0.1)?;
    let field = seed_field(domain, Target::Tetra, FieldParams::new(0.1, 0.1, 0.1), BcMode::Strong, &SeedSpec::EscapeMap, &SeedSpec::EscapeMap, 0.0, 0)?;

    write_checkpoint(&dir.join("field.bin"), &field, 0)?;
    write_csv(&dir.join("field.csv"), &field)?;
    write_vtk(&dir.join("field.vtk"), &field)?;

    let (restored, _) = read_checkpoint(&dir.join("field.bin"))?;
    let mut from_csv = TensorField::zeros(field.domain.clone(), field.target, field.params, field.bc_mode)?;
    read_csv(&dir.join("field.csv"), &mut from_csv)?;
    println!("checkpoint round trip exact: {}", restored.values == field.values);
    println!("csv round trip exact: {}", from_csv.values == field.values);
    println!("files written to {}", dir.display());
    Ok(())
}
