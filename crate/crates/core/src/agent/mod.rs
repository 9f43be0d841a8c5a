//! Deep-Q cache placement (CPP) agent.

pub mod codec;
pub mod qnet;
pub mod replay;
pub mod reward;
pub mod state;
pub mod train;

pub use codec::ActionCodec;
pub use qnet::{Adam, QNetwork};
pub use replay::{ReplayBuffer, Transition};
pub use reward::compute_reward;
pub use state::{encode_state, CppState};
pub use train::{select_action, train_cpp, CppPolicy, CurvePoint, ModelFile, TrainingRun};
