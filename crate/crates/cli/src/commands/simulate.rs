use hhgq_sim::{generate_timetags, SimConfig, Truth};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::io;
use crate::{Cli, Provenance};

pub const TAG_FILE: &str = "tags.hhgt";

#[derive(Serialize)]
struct Output<'a> {
    provenance: Provenance,
    tag_file: String,
    truth: &'a Truth,
}

pub fn run(cli: &Cli) -> Result<()> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("simulate needs --config".into()))?;
    let mut cfg: SimConfig = io::read_config(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let provenance = Provenance::new("simulate", &cfg, Some(cfg.seed), &[])?;
    let tags = cli.out.join(TAG_FILE);
    let truth = generate_timetags(&cfg, &tags)?;
    io::write_json(
        &cli.out.join("simulate.json"),
        &Output {
            provenance,
            tag_file: TAG_FILE.into(),
            truth: &truth,
        },
    )?;
    let records: u64 = truth.records_per_channel.iter().sum();
    println!(
        "wrote {} ({records} records on {} channels, max clicks/pulse {:.4})",
        tags.display(),
        truth.channel_count,
        truth.max_clicks_per_pulse()
    );
    Ok(())
}
