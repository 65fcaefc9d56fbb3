//! Config-driven sweep over family × m on a flat circle with K = 0.1, then
//! one full run emitted as CSV and JSON.
use pmelab::harness::{emit, parse_config, run, sweep, OutputFormat, RunConfig, SweepAxis};

const BASE: &str = r#"
[model]
kind = "circle"
points = 64
k = 0.1

[time]
end = 0.5
snapshots = 10

[initial]
profile = "sine"
base = 1.5
amplitude = 0.5
"#;

fn main() -> pmelab::Result<()> {
    let base = parse_config(BASE)?;
    let axes = [
        SweepAxis::parse("family.name=li-yau,hamilton,li-xu,linear-li-xu")?,
        SweepAxis::parse("pme.m=1.5,2,3")?,
    ];
    let report = sweep(&base, &axes, None, 100)?;
    print!("{}", report.to_csv());

    let cfg = RunConfig::from_map(&base)?;
    let bundle = run(&cfg)?;
    let dir = std::env::temp_dir().join("pmelab-sweep-example");
    for format in [OutputFormat::Csv, OutputFormat::Json] {
        for path in emit(&bundle, &dir, format)? {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
