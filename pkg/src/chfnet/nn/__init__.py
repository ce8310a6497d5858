"""From-scratch dense / 1-D convolutional networks trained with Adam."""
from .builders import build_dcnn, build_mlp
from .gradcheck import gradient_check, numerical_gradient
from .layers import Activation, Conv1D, Dense, Flatten, LayerSpec
from .model import NetworkModel, backward, forward, loss_and_grad, mse_loss, predict
from .optim import AdamState, adam_step
from .serialize import load_model, save_model
from .train import TrainConfig, TrainHistory, train

__all__ = [
    "Activation", "AdamState", "Conv1D", "Dense", "Flatten", "LayerSpec", "NetworkModel",
    "TrainConfig", "TrainHistory", "adam_step", "backward", "build_dcnn", "build_mlp", "forward",
    "gradient_check", "load_model", "loss_and_grad", "mse_loss", "numerical_gradient", "predict",
    "save_model", "train",
]
