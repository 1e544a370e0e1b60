pub mod commands;
pub mod output;
pub mod scene_file;

pub use scene_file::{ConfigError, SceneFile};

/// Process exit status for an error: 2 for bad input or configuration, 1
/// for everything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    use qgeo::GeoError;
    for cause in err.chain() {
        if cause.is::<ConfigError>() || cause.is::<serde_json::Error>() || cause.is::<std::io::Error>() {
            return 2;
        }
        if let Some(GeoError::Config(_) | GeoError::Usage(_)) = cause.downcast_ref::<GeoError>() {
            return 2;
        }
    }
    1
}
