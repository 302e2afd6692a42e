#include "lasted/autodiff/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "lasted/error.hpp"

namespace lasted::ad {

namespace {

using detail::Node;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

// Gradient buffer of input `i`, or nullptr when that input does not need one.
double* grad_of(Node& self, std::size_t i) {
    Node& in = *self.inputs[i];
    return in.requires_grad ? in.grad_buffer().data() : nullptr;
}

const std::vector<double>& value_of(const Node& self, std::size_t i) {
    return self.inputs[i]->value;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    }
}

void require_rank(const Tensor& x, std::size_t rank, const char* op) {
    if (x.rank() != rank) {
        throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_str(x.shape()));
    }
}

// Splits a shape around `axis` into (outer, axis length, inner) for strided
// reductions over an arbitrary axis.
struct AxisView {
    std::size_t outer = 1;
    std::size_t length = 1;
    std::size_t inner = 1;

    std::size_t index(std::size_t o, std::size_t k, std::size_t i) const {
        return (o * length + k) * inner + i;
    }
};

AxisView axis_view(const Shape& shape, std::size_t axis, const char* op) {
    if (axis >= shape.size()) {
        throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) +
                         " out of range for " + shape_str(shape));
    }
    AxisView v;
    for (std::size_t d = 0; d < axis; ++d) {
        v.outer *= shape[d];
    }
    v.length = shape[axis];
    for (std::size_t d = axis + 1; d < shape.size(); ++d) {
        v.inner *= shape[d];
    }
    return v;
}

Shape drop_axis(const Shape& shape, std::size_t axis) {
    Shape out;
    for (std::size_t d = 0; d < shape.size(); ++d) {
        if (d != axis) {
            out.push_back(shape[d]);
        }
    }
    return out;
}

double scalar_value(const Tensor& t, const char* op) {
    if (t.numel() != 1) {
        throw ShapeError(std::string(op) + ": expected a scalar, got " + shape_str(t.shape()));
    }
    return t.data()[0];
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a[i] + b[i];
    }
    return Tensor::make_result(a.shape(), std::move(out), "add", {a, b}, [](Node& self) {
        for (std::size_t in = 0; in < 2; ++in) {
            if (double* g = grad_of(self, in)) {
                for (std::size_t i = 0; i < self.grad.size(); ++i) {
                    g[i] += self.grad[i];
                }
            }
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a[i] - b[i];
    }
    return Tensor::make_result(a.shape(), std::move(out), "sub", {a, b}, [](Node& self) {
        if (double* g = grad_of(self, 0)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                g[i] += self.grad[i];
            }
        }
        if (double* g = grad_of(self, 1)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                g[i] -= self.grad[i];
            }
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a[i] * b[i];
    }
    return Tensor::make_result(a.shape(), std::move(out), "mul", {a, b}, [](Node& self) {
        const auto& av = value_of(self, 0);
        const auto& bv = value_of(self, 1);
        if (double* g = grad_of(self, 0)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                g[i] += self.grad[i] * bv[i];
            }
        }
        if (double* g = grad_of(self, 1)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                g[i] += self.grad[i] * av[i];
            }
        }
    });
}

Tensor scale(const Tensor& x, double factor) {
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = x[i] * factor;
    }
    return Tensor::make_result(x.shape(), std::move(out), "scale", {x}, [factor](Node& self) {
        if (double* g = grad_of(self, 0)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                g[i] += self.grad[i] * factor;
            }
        }
    });
}

Tensor add_constant(const Tensor& x, double offset) {
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = x[i] + offset;
    }
    return Tensor::make_result(x.shape(), std::move(out), "add_constant", {x}, [](Node& self) {
        if (double* g = grad_of(self, 0)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                g[i] += self.grad[i];
            }
        }
    });
}

Tensor mul_scalar(const Tensor& x, const Tensor& factor) {
    const double f = scalar_value(factor, "mul_scalar");
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = x[i] * f;
    }
    return Tensor::make_result(x.shape(), std::move(out), "mul_scalar", {x, factor},
                               [](Node& self) {
                                   const auto& xv = value_of(self, 0);
                                   const double f = value_of(self, 1)[0];
                                   if (double* g = grad_of(self, 0)) {
                                       for (std::size_t i = 0; i < self.grad.size(); ++i) {
                                           g[i] += self.grad[i] * f;
                                       }
                                   }
                                   if (double* g = grad_of(self, 1)) {
                                       double acc = 0.0;
                                       for (std::size_t i = 0; i < self.grad.size(); ++i) {
                                           acc += self.grad[i] * xv[i];
                                       }
                                       g[0] += acc;
                                   }
                               });
}

Tensor exp(const Tensor& x) {
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::exp(x[i]);
    }
    return Tensor::make_result(x.shape(), std::move(out), "exp", {x}, [](Node& self) {
        if (double* g = grad_of(self, 0)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                g[i] += self.grad[i] * self.value[i];
            }
        }
    });
}

Tensor relu(const Tensor& x) {
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = x[i] > 0.0 ? x[i] : 0.0;
    }
    return Tensor::make_result(x.shape(), std::move(out), "relu", {x}, [](Node& self) {
        if (double* g = grad_of(self, 0)) {
            const auto& xv = value_of(self, 0);
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                if (xv[i] > 0.0) {
                    g[i] += self.grad[i];
                }
            }
        }
    });
}

Tensor sum(const Tensor& x) {
    double total = 0.0;
    for (double v : x.data()) {
        total += v;
    }
    return Tensor::make_result({}, {total}, "sum", {x}, [](Node& self) {
        if (double* g = grad_of(self, 0)) {
            const double up = self.grad[0];
            const std::size_t n = self.inputs[0]->value.size();
            for (std::size_t i = 0; i < n; ++i) {
                g[i] += up;
            }
        }
    });
}

Tensor mean(const Tensor& x) {
    return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor dot(const Tensor& a, const Tensor& b) { return sum(mul(a, b)); }

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank(a, 2, "matmul");
    require_rank(b, 2, "matmul");
    const std::size_t m = a.dim(0);
    const std::size_t k = a.dim(1);
    const std::size_t n = b.dim(1);
    if (b.dim(0) != k) {
        throw ShapeError("matmul: inner extents differ, " + shape_str(a.shape()) + " . " +
                         shape_str(b.shape()));
    }
    std::vector<double> out(m * n);
    MutMap(out.data(), m, n).noalias() = ConstMap(a.data().data(), m, k) *
                                         ConstMap(b.data().data(), k, n);
    return Tensor::make_result({m, n}, std::move(out), "matmul", {a, b}, [m, k, n](Node& self) {
        ConstMap g(self.grad.data(), m, n);
        if (double* ga = grad_of(self, 0)) {
            MutMap(ga, m, k).noalias() += g * ConstMap(value_of(self, 1).data(), k, n).transpose();
        }
        if (double* gb = grad_of(self, 1)) {
            MutMap(gb, k, n).noalias() += ConstMap(value_of(self, 0).data(), m, k).transpose() * g;
        }
    });
}

Tensor transpose(const Tensor& x) {
    require_rank(x, 2, "transpose");
    const std::size_t r = x.dim(0);
    const std::size_t c = x.dim(1);
    std::vector<double> out(r * c);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            out[j * r + i] = x[i * c + j];
        }
    }
    return Tensor::make_result({c, r}, std::move(out), "transpose", {x}, [r, c](Node& self) {
        if (double* g = grad_of(self, 0)) {
            for (std::size_t i = 0; i < r; ++i) {
                for (std::size_t j = 0; j < c; ++j) {
                    g[i * c + j] += self.grad[j * r + i];
                }
            }
        }
    });
}

Tensor add_row_vector(const Tensor& x, const Tensor& row) {
    require_rank(x, 2, "add_row_vector");
    require_rank(row, 1, "add_row_vector");
    const std::size_t m = x.dim(0);
    const std::size_t n = x.dim(1);
    if (row.dim(0) != n) {
        throw ShapeError("add_row_vector: row " + shape_str(row.shape()) + " vs matrix " +
                         shape_str(x.shape()));
    }
    std::vector<double> out(m * n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out[i * n + j] = x[i * n + j] + row[j];
        }
    }
    return Tensor::make_result(x.shape(), std::move(out), "add_row_vector", {x, row},
                               [m, n](Node& self) {
                                   if (double* g = grad_of(self, 0)) {
                                       for (std::size_t i = 0; i < m * n; ++i) {
                                           g[i] += self.grad[i];
                                       }
                                   }
                                   if (double* g = grad_of(self, 1)) {
                                       for (std::size_t i = 0; i < m; ++i) {
                                           for (std::size_t j = 0; j < n; ++j) {
                                               g[j] += self.grad[i * n + j];
                                           }
                                       }
                                   }
                               });
}

std::size_t conv_output_extent(std::size_t input, std::size_t kernel, std::size_t stride) {
    if (stride == 0) {
        throw ShapeError("conv2d: stride must be positive");
    }
    if (kernel > input) {
        throw ShapeError("conv2d: kernel extent " + std::to_string(kernel) +
                         " larger than input extent " + std::to_string(input));
    }
    return (input - kernel) / stride + 1;
}

Tensor conv2d(const Tensor& x, const Tensor& kernel, std::size_t stride) {
    require_rank(x, 4, "conv2d");
    require_rank(kernel, 4, "conv2d");
    const std::size_t batch = x.dim(0);
    const std::size_t channels = x.dim(1);
    const std::size_t height = x.dim(2);
    const std::size_t width = x.dim(3);
    const std::size_t out_ch = kernel.dim(0);
    const std::size_t kh = kernel.dim(2);
    const std::size_t kw = kernel.dim(3);
    if (kernel.dim(1) != channels) {
        throw ShapeError("conv2d: kernel " + shape_str(kernel.shape()) + " vs input " +
                         shape_str(x.shape()));
    }
    const std::size_t oh = conv_output_extent(height, kh, stride);
    const std::size_t ow = conv_output_extent(width, kw, stride);
    const std::size_t patch = channels * kh * kw;
    const std::size_t positions = oh * ow;

    // im2col buffers for every batch item are kept for the weight gradient.
    auto cols = std::make_shared<std::vector<double>>(batch * patch * positions);
    const auto xv = x.data();
    for (std::size_t b = 0; b < batch; ++b) {
        double* col = cols->data() + b * patch * positions;
        for (std::size_t c = 0; c < channels; ++c) {
            const double* plane = xv.data() + (b * channels + c) * height * width;
            for (std::size_t i = 0; i < kh; ++i) {
                for (std::size_t j = 0; j < kw; ++j) {
                    double* row = col + ((c * kh + i) * kw + j) * positions;
                    for (std::size_t oy = 0; oy < oh; ++oy) {
                        const double* src = plane + (oy * stride + i) * width + j;
                        for (std::size_t ox = 0; ox < ow; ++ox) {
                            row[oy * ow + ox] = src[ox * stride];
                        }
                    }
                }
            }
        }
    }

    std::vector<double> out(batch * out_ch * positions);
    ConstMap k_mat(kernel.data().data(), out_ch, patch);
    for (std::size_t b = 0; b < batch; ++b) {
        MutMap(out.data() + b * out_ch * positions, out_ch, positions).noalias() =
            k_mat * ConstMap(cols->data() + b * patch * positions, patch, positions);
    }

    auto backward = [=](Node& self) {
        ConstMap k_cur(value_of(self, 1).data(), out_ch, patch);
        double* gx = grad_of(self, 0);
        double* gk = grad_of(self, 1);
        RowMat gcol;
        for (std::size_t b = 0; b < batch; ++b) {
            ConstMap g(self.grad.data() + b * out_ch * positions, out_ch, positions);
            if (gk != nullptr) {
                MutMap(gk, out_ch, patch).noalias() +=
                    g * ConstMap(cols->data() + b * patch * positions, patch, positions).transpose();
            }
            if (gx != nullptr) {
                gcol.noalias() = k_cur.transpose() * g;
                for (std::size_t c = 0; c < channels; ++c) {
                    double* plane = gx + (b * channels + c) * height * width;
                    for (std::size_t i = 0; i < kh; ++i) {
                        for (std::size_t j = 0; j < kw; ++j) {
                            const double* row = gcol.data() + ((c * kh + i) * kw + j) * positions;
                            for (std::size_t oy = 0; oy < oh; ++oy) {
                                double* dst = plane + (oy * stride + i) * width + j;
                                for (std::size_t ox = 0; ox < ow; ++ox) {
                                    dst[ox * stride] += row[oy * ow + ox];
                                }
                            }
                        }
                    }
                }
            }
        }
    };
    return Tensor::make_result({batch, out_ch, oh, ow}, std::move(out), "conv2d", {x, kernel},
                               std::move(backward));
}

Tensor add_channel_bias(const Tensor& x, const Tensor& bias) {
    require_rank(x, 4, "add_channel_bias");
    require_rank(bias, 1, "add_channel_bias");
    const std::size_t batch = x.dim(0);
    const std::size_t channels = x.dim(1);
    const std::size_t plane = x.dim(2) * x.dim(3);
    if (bias.dim(0) != channels) {
        throw ShapeError("add_channel_bias: bias " + shape_str(bias.shape()) + " vs input " +
                         shape_str(x.shape()));
    }
    std::vector<double> out(x.numel());
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t c = 0; c < channels; ++c) {
            const std::size_t base = (b * channels + c) * plane;
            for (std::size_t p = 0; p < plane; ++p) {
                out[base + p] = x[base + p] + bias[c];
            }
        }
    }
    return Tensor::make_result(x.shape(), std::move(out), "add_channel_bias", {x, bias},
                               [batch, channels, plane](Node& self) {
                                   if (double* g = grad_of(self, 0)) {
                                       for (std::size_t i = 0; i < self.grad.size(); ++i) {
                                           g[i] += self.grad[i];
                                       }
                                   }
                                   if (double* g = grad_of(self, 1)) {
                                       for (std::size_t b = 0; b < batch; ++b) {
                                           for (std::size_t c = 0; c < channels; ++c) {
                                               const double* src =
                                                   self.grad.data() + (b * channels + c) * plane;
                                               double acc = 0.0;
                                               for (std::size_t p = 0; p < plane; ++p) {
                                                   acc += src[p];
                                               }
                                               g[c] += acc;
                                           }
                                       }
                                   }
                               });
}

Tensor global_avg_pool(const Tensor& x) {
    require_rank(x, 4, "global_avg_pool");
    const std::size_t batch = x.dim(0);
    const std::size_t channels = x.dim(1);
    const std::size_t plane = x.dim(2) * x.dim(3);
    const double inv = 1.0 / static_cast<double>(plane);
    std::vector<double> out(batch * channels);
    for (std::size_t bc = 0; bc < batch * channels; ++bc) {
        double acc = 0.0;
        for (std::size_t p = 0; p < plane; ++p) {
            acc += x[bc * plane + p];
        }
        out[bc] = acc * inv;
    }
    return Tensor::make_result({batch, channels}, std::move(out), "global_avg_pool", {x},
                               [plane, inv](Node& self) {
                                   if (double* g = grad_of(self, 0)) {
                                       for (std::size_t bc = 0; bc < self.grad.size(); ++bc) {
                                           const double up = self.grad[bc] * inv;
                                           for (std::size_t p = 0; p < plane; ++p) {
                                               g[bc * plane + p] += up;
                                           }
                                       }
                                   }
                               });
}

Tensor l2_normalize(const Tensor& x, std::size_t axis) {
    const AxisView v = axis_view(x.shape(), axis, "l2_normalize");
    auto norms = std::make_shared<std::vector<double>>(v.outer * v.inner);
    std::vector<double> out(x.numel());
    for (std::size_t o = 0; o < v.outer; ++o) {
        for (std::size_t i = 0; i < v.inner; ++i) {
            double sq = 0.0;
            for (std::size_t k = 0; k < v.length; ++k) {
                const double e = x[v.index(o, k, i)];
                sq += e * e;
            }
            const double norm = std::sqrt(sq);
            if (!(norm > 0.0)) {
                throw NonFiniteError("l2_normalize: zero-norm slice");
            }
            (*norms)[o * v.inner + i] = norm;
            for (std::size_t k = 0; k < v.length; ++k) {
                out[v.index(o, k, i)] = x[v.index(o, k, i)] / norm;
            }
        }
    }
    return Tensor::make_result(x.shape(), std::move(out), "l2_normalize", {x},
                               [v, norms](Node& self) {
                                   double* g = grad_of(self, 0);
                                   if (g == nullptr) {
                                       return;
                                   }
                                   // d(x/|x|) = (g - y (y.g)) / |x|
                                   for (std::size_t o = 0; o < v.outer; ++o) {
                                       for (std::size_t i = 0; i < v.inner; ++i) {
                                           double yg = 0.0;
                                           for (std::size_t k = 0; k < v.length; ++k) {
                                               const std::size_t idx = v.index(o, k, i);
                                               yg += self.value[idx] * self.grad[idx];
                                           }
                                           const double norm = (*norms)[o * v.inner + i];
                                           for (std::size_t k = 0; k < v.length; ++k) {
                                               const std::size_t idx = v.index(o, k, i);
                                               g[idx] += (self.grad[idx] - self.value[idx] * yg) / norm;
                                           }
                                       }
                                   }
                               });
}

Tensor log_sum_exp(const Tensor& x, std::size_t axis) {
    const std::size_t n = x.numel();
    return log_sum_exp_masked(x, axis, std::vector<unsigned char>(n, 1));
}

Tensor log_sum_exp_masked(const Tensor& x, std::size_t axis,
                          std::span<const unsigned char> mask) {
    if (mask.size() != x.numel()) {
        throw ShapeError("log_sum_exp: mask has " + std::to_string(mask.size()) +
                         " entries for tensor " + shape_str(x.shape()));
    }
    const AxisView v = axis_view(x.shape(), axis, "log_sum_exp");
    std::vector<unsigned char> keep(mask.begin(), mask.end());
    // Softmax weights over the kept entries, reused by the backward rule.
    auto weights = std::make_shared<std::vector<double>>(x.numel(), 0.0);
    std::vector<double> out(v.outer * v.inner);
    for (std::size_t o = 0; o < v.outer; ++o) {
        for (std::size_t i = 0; i < v.inner; ++i) {
            double peak = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < v.length; ++k) {
                const std::size_t idx = v.index(o, k, i);
                if (keep[idx] != 0) {
                    peak = std::max(peak, x[idx]);
                }
            }
            if (!std::isfinite(peak)) {
                throw ArgumentError("log_sum_exp: a slice has no unmasked entries");
            }
            double acc = 0.0;
            for (std::size_t k = 0; k < v.length; ++k) {
                const std::size_t idx = v.index(o, k, i);
                if (keep[idx] != 0) {
                    const double e = std::exp(x[idx] - peak);
                    (*weights)[idx] = e;
                    acc += e;
                }
            }
            for (std::size_t k = 0; k < v.length; ++k) {
                (*weights)[v.index(o, k, i)] /= acc;
            }
            out[o * v.inner + i] = peak + std::log(acc);
        }
    }
    return Tensor::make_result(drop_axis(x.shape(), axis), std::move(out), "log_sum_exp", {x},
                               [v, weights](Node& self) {
                                   double* g = grad_of(self, 0);
                                   if (g == nullptr) {
                                       return;
                                   }
                                   for (std::size_t o = 0; o < v.outer; ++o) {
                                       for (std::size_t i = 0; i < v.inner; ++i) {
                                           const double up = self.grad[o * v.inner + i];
                                           for (std::size_t k = 0; k < v.length; ++k) {
                                               const std::size_t idx = v.index(o, k, i);
                                               g[idx] += up * (*weights)[idx];
                                           }
                                       }
                                   }
                               });
}

Tensor gather(const Tensor& x, std::span<const std::size_t> flat_indices) {
    if (flat_indices.empty()) {
        throw ShapeError("gather: no indices");
    }
    std::vector<std::size_t> idx(flat_indices.begin(), flat_indices.end());
    std::vector<double> out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= x.numel()) {
            throw ShapeError("gather: index " + std::to_string(idx[i]) + " out of range for " +
                             shape_str(x.shape()));
        }
        out[i] = x[idx[i]];
    }
    const std::size_t count = idx.size();
    return Tensor::make_result({count}, std::move(out), "gather", {x},
                               [idx = std::move(idx)](Node& self) {
                                   if (double* g = grad_of(self, 0)) {
                                       for (std::size_t i = 0; i < idx.size(); ++i) {
                                           g[idx[i]] += self.grad[i];
                                       }
                                   }
                               });
}

}  // namespace lasted::ad
