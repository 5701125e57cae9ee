//! Behavior statistics over identity tracks, plus table and plot output.

mod plot;
mod report;
mod stats;

pub use plot::{label_color, plot_trajectories, PALETTE};
pub use report::{emit_report, MotRow, ReportFormat, ReportRows};
pub use stats::{
    distance_traveled, interaction_events, trajectory_stats, trajectory_stats_all, zone_occupancy,
    InteractionCriterion, InteractionEvent, Occupancy, TrajectoryStats, ZoneCount, ZoneDefinition, DEFAULT_HUDDLE_IOU,
};
