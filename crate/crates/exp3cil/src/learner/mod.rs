//! The incremental classifier and its training machinery: forward passes,
//! the distillation losses with analytic gradients, SGD, NCM/FC prediction,
//! accuracy evaluation, and herding exemplar selection.

mod loss;
mod model;

pub use loss::{
    feature_kd_loss, feature_kd_loss_grad, log_softmax, logit_kd_loss, logit_kd_loss_grad,
    overall_loss_and_grad, rescale_eta, sgd_step, softmax, train_for_epochs, Gradients,
    LossConfig,
};
pub use model::{herding_select, Activation, Arch, ClassMeans, ModelState};
