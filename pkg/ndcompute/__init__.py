from .conv import conv3d, conv3d_backward, maxpool3d, maxpool3d_backward, relu, relu_backward
from .gradcheck import differentiable, grad_check
from .linalg import (
    affine, affine_backward, l2_normalize, l2_normalize_backward, matmul, matmul_backward,
)
from .optim import AdamState, adam_step
from .recurrent import (
    bigru_layer, bigru_layer_backward, gru_param_shapes, temporal_avgmax, temporal_avgmax_backward,
)
from .tensor import CHECK_DTYPE, TRAIN_DTYPE, as_tensor, require_finite
