use std::path::PathBuf;

use ugtrack::simulator::{load_scenario, scene_dir_name, write_scene};

use crate::error::CliError;

#[derive(clap::Args)]
pub struct Args {
    /// Scenario TOML: a `[benchmark]` generator or explicit `[[scenes]]`.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Receives one scene_NNN directory per scene.
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(a: &Args) -> Result<(), CliError> {
    let scenes = load_scenario(&a.scenario)?;
    for (i, scene) in scenes.iter().enumerate() {
        let rendered = write_scene(&a.out_dir.join(scene_dir_name(i)), scene)?;
        let clutter: usize = rendered.log.iter().map(|l| l.clutter).sum();
        println!(
            "{}: {} frames, {} objects, {} detections ({clutter} clutter)",
            scene_dir_name(i),
            scene.n_frames,
            scene.objects.len(),
            rendered.detections.len()
        );
    }
    Ok(())
}
