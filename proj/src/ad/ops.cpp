#include "fairway/ad/ops.hpp"

#include <algorithm>
#include <cmath>

#include "fairway/core/error.hpp"

namespace fairway::ad {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw ValidationError(msg);
}

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double stable_softplus(double x) {
    // log(1 + e^x) = max(x, 0) + log1p(e^-|x|)
    return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

} // namespace

Var add(const Var& a, const Var& b) {
    require(a.value().same_shape(b.value()), "add: shape mismatch");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += b.value()[i];
    auto pa = a.node(), pb = b.node();
    return Var(make_node(std::move(out), {pa, pb}, [pa, pb](Node& n) {
        for (Node* p : {pa.get(), pb.get()}) {
            if (!p->requires_grad) continue;
            for (std::size_t i = 0; i < n.grad.numel(); ++i) p->grad[i] += n.grad[i];
        }
    }));
}

Var sub(const Var& a, const Var& b) {
    require(a.value().same_shape(b.value()), "sub: shape mismatch");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= b.value()[i];
    auto pa = a.node(), pb = b.node();
    return Var(make_node(std::move(out), {pa, pb}, [pa, pb](Node& n) {
        if (pa->requires_grad)
            for (std::size_t i = 0; i < n.grad.numel(); ++i) pa->grad[i] += n.grad[i];
        if (pb->requires_grad)
            for (std::size_t i = 0; i < n.grad.numel(); ++i) pb->grad[i] -= n.grad[i];
    }));
}

Var mul(const Var& a, const Var& b) {
    require(a.value().same_shape(b.value()), "mul: shape mismatch");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= b.value()[i];
    auto pa = a.node(), pb = b.node();
    return Var(make_node(std::move(out), {pa, pb}, [pa, pb](Node& n) {
        if (pa->requires_grad)
            for (std::size_t i = 0; i < n.grad.numel(); ++i)
                pa->grad[i] += n.grad[i] * pb->value[i];
        if (pb->requires_grad)
            for (std::size_t i = 0; i < n.grad.numel(); ++i)
                pb->grad[i] += n.grad[i] * pa->value[i];
    }));
}

Var divide(const Var& a, const Var& b) {
    require(a.value().same_shape(b.value()), "divide: shape mismatch");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] /= b.value()[i];
    auto pa = a.node(), pb = b.node();
    return Var(make_node(std::move(out), {pa, pb}, [pa, pb](Node& n) {
        for (std::size_t i = 0; i < n.grad.numel(); ++i) {
            const double bv = pb->value[i];
            if (pa->requires_grad) pa->grad[i] += n.grad[i] / bv;
            if (pb->requires_grad) pb->grad[i] -= n.grad[i] * pa->value[i] / (bv * bv);
        }
    }));
}

Var scale(const Var& a, double s) {
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= s;
    auto pa = a.node();
    return Var(make_node(std::move(out), {pa}, [pa, s](Node& n) {
        for (std::size_t i = 0; i < n.grad.numel(); ++i) pa->grad[i] += n.grad[i] * s;
    }));
}

Var add_const(const Var& a, double c) {
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += c;
    auto pa = a.node();
    return Var(make_node(std::move(out), {pa}, [pa](Node& n) {
        for (std::size_t i = 0; i < n.grad.numel(); ++i) pa->grad[i] += n.grad[i];
    }));
}

Var mul_const(const Var& a, const Tensor& m) {
    require(a.value().same_shape(m), "mul_const: shape mismatch");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= m[i];
    auto pa = a.node();
    return Var(make_node(std::move(out), {pa}, [pa, m](Node& n) {
        for (std::size_t i = 0; i < n.grad.numel(); ++i) pa->grad[i] += n.grad[i] * m[i];
    }));
}

Var relu(const Var& a) {
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::max(out[i], 0.0);
    auto pa = a.node();
    return Var(make_node(std::move(out), {pa}, [pa](Node& n) {
        for (std::size_t i = 0; i < n.grad.numel(); ++i)
            if (pa->value[i] > 0.0) pa->grad[i] += n.grad[i];
    }));
}

Var sigmoid(const Var& a) {
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = stable_sigmoid(out[i]);
    auto pa = a.node();
    auto node = make_node(std::move(out), {pa}, nullptr);
    Node* self = node.get();
    if (node->requires_grad)
        node->backprop = [pa, self](Node& n) {
            for (std::size_t i = 0; i < n.grad.numel(); ++i) {
                const double s = self->value[i];
                pa->grad[i] += n.grad[i] * s * (1.0 - s);
            }
        };
    return Var(std::move(node));
}

Var softplus(const Var& a) {
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = stable_softplus(out[i]);
    auto pa = a.node();
    return Var(make_node(std::move(out), {pa}, [pa](Node& n) {
        for (std::size_t i = 0; i < n.grad.numel(); ++i)
            pa->grad[i] += n.grad[i] * stable_sigmoid(pa->value[i]);
    }));
}

Var sum_all(const Var& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.value().numel(); ++i) s += a.value()[i];
    auto pa = a.node();
    return Var(make_node(Tensor::scalar(s), {pa}, [pa](Node& n) {
        const double g = n.grad[0];
        for (std::size_t i = 0; i < pa->grad.numel(); ++i) pa->grad[i] += g;
    }));
}

Var mean_all(const Var& a) {
    const double inv = 1.0 / static_cast<double>(a.value().numel());
    double s = 0.0;
    for (std::size_t i = 0; i < a.value().numel(); ++i) s += a.value()[i];
    auto pa = a.node();
    return Var(make_node(Tensor::scalar(s * inv), {pa}, [pa, inv](Node& n) {
        const double g = n.grad[0] * inv;
        for (std::size_t i = 0; i < pa->grad.numel(); ++i) pa->grad[i] += g;
    }));
}

Var matmul(const Var& a, const Var& b, bool transpose_b) {
    require(a.value().rank() == 2 && b.value().rank() == 2, "matmul: rank-2 operands required");
    const int n = a.value().dim(0);
    const int k = a.value().dim(1);
    const int m = transpose_b ? b.value().dim(0) : b.value().dim(1);
    require(transpose_b ? b.value().dim(1) == k : b.value().dim(0) == k,
            "matmul: inner dimensions disagree");

    Tensor out({n, m});
    const double* ad = a.value().data();
    const double* bd = b.value().data();
    double* od = out.data();
    if (!transpose_b) {
        for (int i = 0; i < n; ++i)
            for (int kk = 0; kk < k; ++kk) {
                const double av = ad[i * k + kk];
                const double* brow = bd + static_cast<std::size_t>(kk) * m;
                double* orow = od + static_cast<std::size_t>(i) * m;
                for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
            }
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                const double* arow = ad + static_cast<std::size_t>(i) * k;
                const double* brow = bd + static_cast<std::size_t>(j) * k;
                double s = 0.0;
                for (int kk = 0; kk < k; ++kk) s += arow[kk] * brow[kk];
                od[static_cast<std::size_t>(i) * m + j] = s;
            }
    }

    auto pa = a.node(), pb = b.node();
    return Var(make_node(std::move(out), {pa, pb}, [pa, pb, n, k, m, transpose_b](Node& node) {
        const double* g = node.grad.data();
        if (!transpose_b) {
            if (pa->requires_grad) { // dA = G * B^T
                double* da = pa->grad.data();
                const double* bd2 = pb->value.data();
                for (int i = 0; i < n; ++i)
                    for (int kk = 0; kk < k; ++kk) {
                        const double* grow = g + static_cast<std::size_t>(i) * m;
                        const double* brow = bd2 + static_cast<std::size_t>(kk) * m;
                        double s = 0.0;
                        for (int j = 0; j < m; ++j) s += grow[j] * brow[j];
                        da[static_cast<std::size_t>(i) * k + kk] += s;
                    }
            }
            if (pb->requires_grad) { // dB = A^T * G
                double* db = pb->grad.data();
                const double* ad2 = pa->value.data();
                for (int kk = 0; kk < k; ++kk)
                    for (int i = 0; i < n; ++i) {
                        const double av = ad2[static_cast<std::size_t>(i) * k + kk];
                        const double* grow = g + static_cast<std::size_t>(i) * m;
                        double* brow = db + static_cast<std::size_t>(kk) * m;
                        for (int j = 0; j < m; ++j) brow[j] += av * grow[j];
                    }
            }
        } else {
            if (pa->requires_grad) { // out = A B^T  =>  dA = G * B
                double* da = pa->grad.data();
                const double* bd2 = pb->value.data();
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < m; ++j) {
                        const double gv = g[static_cast<std::size_t>(i) * m + j];
                        const double* brow = bd2 + static_cast<std::size_t>(j) * k;
                        double* arow = da + static_cast<std::size_t>(i) * k;
                        for (int kk = 0; kk < k; ++kk) arow[kk] += gv * brow[kk];
                    }
            }
            if (pb->requires_grad) { // dB = G^T * A
                double* db = pb->grad.data();
                const double* ad2 = pa->value.data();
                for (int j = 0; j < m; ++j)
                    for (int i = 0; i < n; ++i) {
                        const double gv = g[static_cast<std::size_t>(i) * m + j];
                        const double* arow = ad2 + static_cast<std::size_t>(i) * k;
                        double* brow = db + static_cast<std::size_t>(j) * k;
                        for (int kk = 0; kk < k; ++kk) brow[kk] += gv * arow[kk];
                    }
            }
        }
    }));
}

Var add_rowvec(const Var& a, const Var& v) {
    require(a.value().rank() == 2 && v.value().rank() == 1, "add_rowvec: (n,m) and (m) required");
    const int n = a.value().dim(0), m = a.value().dim(1);
    require(v.value().dim(0) == m, "add_rowvec: width mismatch");
    Tensor out = a.value();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) out.at2(i, j) += v.value()[static_cast<std::size_t>(j)];
    auto pa = a.node(), pv = v.node();
    return Var(make_node(std::move(out), {pa, pv}, [pa, pv, n, m](Node& node) {
        if (pa->requires_grad)
            for (std::size_t i = 0; i < node.grad.numel(); ++i) pa->grad[i] += node.grad[i];
        if (pv->requires_grad)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j)
                    pv->grad[static_cast<std::size_t>(j)] += node.grad.at2(i, j);
    }));
}

Var softmax_rows(const Var& a) {
    require(a.value().rank() == 2, "softmax_rows: rank-2 required");
    const int n = a.value().dim(0), m = a.value().dim(1);
    Tensor out({n, m});
    for (int i = 0; i < n; ++i) {
        double mx = a.value().at2(i, 0);
        for (int j = 1; j < m; ++j) mx = std::max(mx, a.value().at2(i, j));
        double denom = 0.0;
        for (int j = 0; j < m; ++j) {
            const double e = std::exp(a.value().at2(i, j) - mx);
            out.at2(i, j) = e;
            denom += e;
        }
        const double inv = 1.0 / denom;
        for (int j = 0; j < m; ++j) out.at2(i, j) *= inv;
    }
    auto pa = a.node();
    auto node = make_node(std::move(out), {pa}, nullptr);
    Node* self = node.get();
    if (node->requires_grad)
        node->backprop = [pa, self, n, m](Node& nd) {
            for (int i = 0; i < n; ++i) {
                double dot = 0.0;
                for (int j = 0; j < m; ++j) dot += nd.grad.at2(i, j) * self->value.at2(i, j);
                for (int j = 0; j < m; ++j)
                    pa->grad.at2(i, j) += self->value.at2(i, j) * (nd.grad.at2(i, j) - dot);
            }
        };
    return Var(std::move(node));
}

Var slice_cols(const Var& a, int c0, int c1) {
    require(a.value().rank() == 2, "slice_cols: rank-2 required");
    const int n = a.value().dim(0), m = a.value().dim(1);
    require(0 <= c0 && c0 < c1 && c1 <= m, "slice_cols: bad range");
    const int w = c1 - c0;
    Tensor out({n, w});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < w; ++j) out.at2(i, j) = a.value().at2(i, c0 + j);
    auto pa = a.node();
    return Var(make_node(std::move(out), {pa}, [pa, n, w, c0](Node& node) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < w; ++j) pa->grad.at2(i, c0 + j) += node.grad.at2(i, j);
    }));
}

Var concat_cols(const std::vector<Var>& parts) {
    require(!parts.empty(), "concat_cols: empty input");
    const int n = parts[0].value().dim(0);
    int m = 0;
    for (const auto& p : parts) {
        require(p.value().rank() == 2 && p.value().dim(0) == n, "concat_cols: row mismatch");
        m += p.value().dim(1);
    }
    Tensor out({n, m});
    int off = 0;
    std::vector<NodePtr> parents;
    std::vector<int> offsets;
    for (const auto& p : parts) {
        const int w = p.value().dim(1);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < w; ++j) out.at2(i, off + j) = p.value().at2(i, j);
        parents.push_back(p.node());
        offsets.push_back(off);
        off += w;
    }
    return Var(make_node(std::move(out), parents, [parents, offsets, n](Node& node) {
        for (std::size_t k = 0; k < parents.size(); ++k) {
            Node* p = parents[k].get();
            if (!p->requires_grad) continue;
            const int w = p->value.dim(1);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < w; ++j) p->grad.at2(i, j) += node.grad.at2(i, offsets[k] + j);
        }
    }));
}

Var reshape(const Var& a, std::vector<int> shape) {
    Tensor out(shape);
    require(out.numel() == a.value().numel(), "reshape: element count mismatch");
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a.value()[i];
    auto pa = a.node();
    return Var(make_node(std::move(out), {pa}, [pa](Node& node) {
        for (std::size_t i = 0; i < node.grad.numel(); ++i) pa->grad[i] += node.grad[i];
    }));
}

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
    require(x.value().rank() == 3, "conv2d: input must be (h,w,c)");
    require(w.value().rank() == 4, "conv2d: weight must be (k,k,cin,cout)");
    const int h = x.value().dim(0), wid = x.value().dim(1), cin = x.value().dim(2);
    const int k = w.value().dim(0);
    require(w.value().dim(1) == k && w.value().dim(2) == cin, "conv2d: weight shape mismatch");
    const int cout = w.value().dim(3);
    require(b.value().rank() == 1 && b.value().dim(0) == cout, "conv2d: bias shape mismatch");
    require(stride >= 1, "conv2d: stride must be >= 1");
    const int oh = (h + 2 * pad - k) / stride + 1;
    const int ow = (wid + 2 * pad - k) / stride + 1;
    require(oh > 0 && ow > 0, "conv2d: output would be empty");

    Tensor out({oh, ow, cout});
    const double* xd = x.value().data();
    const double* wd = w.value().data();
    const double* bd = b.value().data();
    double* od = out.data();
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            double* orow = od + (static_cast<std::size_t>(oy) * ow + ox) * cout;
            for (int co = 0; co < cout; ++co) orow[co] = bd[co];
            for (int ky = 0; ky < k; ++ky) {
                const int iy = oy * stride - pad + ky;
                if (iy < 0 || iy >= h) continue;
                for (int kx = 0; kx < k; ++kx) {
                    const int ix = ox * stride - pad + kx;
                    if (ix < 0 || ix >= wid) continue;
                    const double* xrow = xd + (static_cast<std::size_t>(iy) * wid + ix) * cin;
                    const double* wbase =
                        wd + (static_cast<std::size_t>(ky) * k + kx) * cin * cout;
                    for (int ci = 0; ci < cin; ++ci) {
                        const double xv = xrow[ci];
                        if (xv == 0.0) continue;
                        const double* wrow = wbase + static_cast<std::size_t>(ci) * cout;
                        for (int co = 0; co < cout; ++co) orow[co] += xv * wrow[co];
                    }
                }
            }
        }
    }

    auto px = x.node(), pw = w.node(), pb = b.node();
    return Var(make_node(std::move(out), {px, pw, pb},
                         [px, pw, pb, h, wid, cin, k, cout, stride, pad](Node& node) {
        const int oh2 = node.value.dim(0), ow2 = node.value.dim(1);
        const double* g = node.grad.data();
        const double* xd2 = px->value.data();
        const double* wd2 = pw->value.data();
        double* dx = px->requires_grad ? px->grad.data() : nullptr;
        double* dw = pw->requires_grad ? pw->grad.data() : nullptr;
        double* db = pb->requires_grad ? pb->grad.data() : nullptr;
        for (int oy = 0; oy < oh2; ++oy) {
            for (int ox = 0; ox < ow2; ++ox) {
                const double* grow = g + (static_cast<std::size_t>(oy) * ow2 + ox) * cout;
                if (db)
                    for (int co = 0; co < cout; ++co) db[co] += grow[co];
                for (int ky = 0; ky < k; ++ky) {
                    const int iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= h) continue;
                    for (int kx = 0; kx < k; ++kx) {
                        const int ix = ox * stride - pad + kx;
                        if (ix < 0 || ix >= wid) continue;
                        const std::size_t xoff = (static_cast<std::size_t>(iy) * wid + ix) * cin;
                        const std::size_t woff =
                            (static_cast<std::size_t>(ky) * k + kx) * cin * cout;
                        for (int ci = 0; ci < cin; ++ci) {
                            const double xv = xd2[xoff + ci];
                            const double* wrow = wd2 + woff + static_cast<std::size_t>(ci) * cout;
                            double dot = 0.0;
                            for (int co = 0; co < cout; ++co) {
                                const double gv = grow[co];
                                if (dw) dw[woff + static_cast<std::size_t>(ci) * cout + co] +=
                                    xv * gv;
                                dot += wrow[co] * gv;
                            }
                            if (dx) dx[xoff + ci] += dot;
                        }
                    }
                }
            }
        }
    }));
}

Var deform_conv2d(const Var& x, const Var& w, const Var& b, const Var& offsets, int pad) {
    require(x.value().rank() == 3, "deform_conv2d: input must be (h,w,c)");
    const int h = x.value().dim(0), wid = x.value().dim(1), cin = x.value().dim(2);
    const int k = w.value().dim(0);
    require(w.value().rank() == 4 && w.value().dim(1) == k && w.value().dim(2) == cin,
            "deform_conv2d: weight shape mismatch");
    const int cout = w.value().dim(3);
    require(b.value().rank() == 1 && b.value().dim(0) == cout,
            "deform_conv2d: bias shape mismatch");
    require(offsets.value().rank() == 3 && offsets.value().dim(0) == h &&
                offsets.value().dim(1) == wid && offsets.value().dim(2) == 2 * k * k,
            "deform_conv2d: offsets must be (h,w,2*k*k)");
    require(x.value().all_finite(), "deform_conv2d: non-finite input features");

    const int taps = k * k;
    Tensor out({h, wid, cout});
    const double* xd = x.value().data();
    const double* wd = w.value().data();
    const double* odv = offsets.value().data();

    auto sample = [&](double py, double px_, int ci) -> double {
        const int y0 = static_cast<int>(std::floor(py));
        const int x0 = static_cast<int>(std::floor(px_));
        const double wy = py - y0, wx = px_ - x0;
        double v = 0.0;
        for (int dy = 0; dy <= 1; ++dy) {
            const int yy = y0 + dy;
            if (yy < 0 || yy >= h) continue;
            const double fy = dy ? wy : 1.0 - wy;
            for (int dx = 0; dx <= 1; ++dx) {
                const int xx = x0 + dx;
                if (xx < 0 || xx >= wid) continue;
                const double fx = dx ? wx : 1.0 - wx;
                v += fy * fx * xd[(static_cast<std::size_t>(yy) * wid + xx) * cin + ci];
            }
        }
        return v;
    };

    for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < wid; ++xx) {
            double* orow = out.data() + (static_cast<std::size_t>(y) * wid + xx) * cout;
            for (int co = 0; co < cout; ++co) orow[co] = b.value()[static_cast<std::size_t>(co)];
            const double* off = odv + (static_cast<std::size_t>(y) * wid + xx) * 2 * taps;
            for (int t = 0; t < taps; ++t) {
                const int ky = t / k, kx = t % k;
                const double py = y + ky - pad + off[2 * t];
                const double px_ = xx + kx - pad + off[2 * t + 1];
                const double* wbase = wd + static_cast<std::size_t>(t) * cin * cout;
                for (int ci = 0; ci < cin; ++ci) {
                    const double v = sample(py, px_, ci);
                    if (v == 0.0) continue;
                    const double* wrow = wbase + static_cast<std::size_t>(ci) * cout;
                    for (int co = 0; co < cout; ++co) orow[co] += v * wrow[co];
                }
            }
        }
    }

    auto px_n = x.node(), pw = w.node(), pb = b.node(), po = offsets.node();
    return Var(make_node(std::move(out), {px_n, pw, pb, po},
                         [px_n, pw, pb, po, h, wid, cin, k, cout, pad](Node& node) {
        const int taps2 = k * k;
        const double* g = node.grad.data();
        const double* xd2 = px_n->value.data();
        const double* wd2 = pw->value.data();
        const double* odv2 = po->value.data();
        double* dx = px_n->requires_grad ? px_n->grad.data() : nullptr;
        double* dw = pw->requires_grad ? pw->grad.data() : nullptr;
        double* db = pb->requires_grad ? pb->grad.data() : nullptr;
        double* doff = po->requires_grad ? po->grad.data() : nullptr;

        for (int y = 0; y < h; ++y) {
            for (int xx = 0; xx < wid; ++xx) {
                const double* grow = g + (static_cast<std::size_t>(y) * wid + xx) * cout;
                if (db)
                    for (int co = 0; co < cout; ++co) db[co] += grow[co];
                const double* off = odv2 + (static_cast<std::size_t>(y) * wid + xx) * 2 * taps2;
                for (int t = 0; t < taps2; ++t) {
                    const int ky = t / k, kx = t % k;
                    const double py = y + ky - pad + off[2 * t];
                    const double pxx = xx + kx - pad + off[2 * t + 1];
                    const int y0 = static_cast<int>(std::floor(py));
                    const int x0 = static_cast<int>(std::floor(pxx));
                    const double wy = py - y0, wx = pxx - x0;
                    // Corner values with zeros outside the grid.
                    double corner[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
                    const double* wbase = wd2 + static_cast<std::size_t>(t) * cin * cout;
                    double dpy = 0.0, dpx = 0.0;
                    for (int ci = 0; ci < cin; ++ci) {
                        // Upstream sensitivity of the sampled value.
                        const double* wrow = wbase + static_cast<std::size_t>(ci) * cout;
                        double gs = 0.0;
                        for (int co = 0; co < cout; ++co) gs += wrow[co] * grow[co];

                        double v = 0.0;
                        for (int dy = 0; dy <= 1; ++dy) {
                            const int yy = y0 + dy;
                            const bool yin = yy >= 0 && yy < h;
                            const double fy = dy ? wy : 1.0 - wy;
                            for (int dxi = 0; dxi <= 1; ++dxi) {
                                const int xc = x0 + dxi;
                                const bool in = yin && xc >= 0 && xc < wid;
                                const double cv =
                                    in ? xd2[(static_cast<std::size_t>(yy) * wid + xc) * cin + ci]
                                       : 0.0;
                                corner[dy][dxi] = cv;
                                const double fx = dxi ? wx : 1.0 - wx;
                                v += fy * fx * cv;
                                if (in && dx)
                                    dx[(static_cast<std::size_t>(yy) * wid + xc) * cin + ci] +=
                                        gs * fy * fx;
                            }
                        }
                        if (dw) {
                            double* dwrow = dw + static_cast<std::size_t>(t) * cin * cout +
                                            static_cast<std::size_t>(ci) * cout;
                            for (int co = 0; co < cout; ++co) dwrow[co] += v * grow[co];
                        }
                        if (doff) {
                            const double dv_dpy = (corner[1][0] - corner[0][0]) * (1.0 - wx) +
                                                  (corner[1][1] - corner[0][1]) * wx;
                            const double dv_dpx = (corner[0][1] - corner[0][0]) * (1.0 - wy) +
                                                  (corner[1][1] - corner[1][0]) * wy;
                            dpy += gs * dv_dpy;
                            dpx += gs * dv_dpx;
                        }
                    }
                    if (doff) {
                        doff[(static_cast<std::size_t>(y) * wid + xx) * 2 * taps2 + 2 * t] += dpy;
                        doff[(static_cast<std::size_t>(y) * wid + xx) * 2 * taps2 + 2 * t + 1] +=
                            dpx;
                    }
                }
            }
        }
    }));
}

Var upsample_bilinear(const Var& x, int factor) {
    require(x.value().rank() == 3, "upsample_bilinear: (h,w,c) required");
    require(factor >= 1, "upsample_bilinear: factor must be >= 1");
    const int h = x.value().dim(0), w = x.value().dim(1), c = x.value().dim(2);
    const int oh = h * factor, ow = w * factor;
    Tensor out({oh, ow, c});
    const double inv = 1.0 / factor;
    for (int oy = 0; oy < oh; ++oy) {
        double fy = (oy + 0.5) * inv - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(h - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, h - 1);
        const double wy = fy - y0;
        for (int ox = 0; ox < ow; ++ox) {
            double fx = (ox + 0.5) * inv - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(w - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, w - 1);
            const double wx = fx - x0;
            for (int ch = 0; ch < c; ++ch) {
                const double top =
                    x.value().at3(y0, x0, ch) * (1 - wx) + x.value().at3(y0, x1, ch) * wx;
                const double bot =
                    x.value().at3(y1, x0, ch) * (1 - wx) + x.value().at3(y1, x1, ch) * wx;
                out.at3(oy, ox, ch) = top * (1 - wy) + bot * wy;
            }
        }
    }
    auto px = x.node();
    return Var(make_node(std::move(out), {px}, [px, h, w, c, factor](Node& node) {
        const int oh2 = h * factor, ow2 = w * factor;
        const double inv2 = 1.0 / factor;
        for (int oy = 0; oy < oh2; ++oy) {
            double fy = (oy + 0.5) * inv2 - 0.5;
            fy = std::clamp(fy, 0.0, static_cast<double>(h - 1));
            const int y0 = static_cast<int>(fy);
            const int y1 = std::min(y0 + 1, h - 1);
            const double wy = fy - y0;
            for (int ox = 0; ox < ow2; ++ox) {
                double fx = (ox + 0.5) * inv2 - 0.5;
                fx = std::clamp(fx, 0.0, static_cast<double>(w - 1));
                const int x0 = static_cast<int>(fx);
                const int x1 = std::min(x0 + 1, w - 1);
                const double wx = fx - x0;
                for (int ch = 0; ch < c; ++ch) {
                    const double g = node.grad.at3(oy, ox, ch);
                    px->grad.at3(y0, x0, ch) += g * (1 - wy) * (1 - wx);
                    px->grad.at3(y0, x1, ch) += g * (1 - wy) * wx;
                    px->grad.at3(y1, x0, ch) += g * wy * (1 - wx);
                    px->grad.at3(y1, x1, ch) += g * wy * wx;
                }
            }
        }
    }));
}

Var channel_mean(const Var& x) {
    require(x.value().rank() == 3, "channel_mean: (h,w,c) required");
    const int h = x.value().dim(0), w = x.value().dim(1), c = x.value().dim(2);
    Tensor out({h, w, 1});
    const double inv = 1.0 / c;
    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx) {
            double s = 0.0;
            for (int ch = 0; ch < c; ++ch) s += x.value().at3(y, xx, ch);
            out.at3(y, xx, 0) = s * inv;
        }
    auto px = x.node();
    return Var(make_node(std::move(out), {px}, [px, h, w, c, inv](Node& node) {
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx) {
                const double g = node.grad.at3(y, xx, 0) * inv;
                for (int ch = 0; ch < c; ++ch) px->grad.at3(y, xx, ch) += g;
            }
    }));
}

Var channel_max(const Var& x) {
    require(x.value().rank() == 3, "channel_max: (h,w,c) required");
    const int h = x.value().dim(0), w = x.value().dim(1), c = x.value().dim(2);
    Tensor out({h, w, 1});
    auto argmax = std::make_shared<std::vector<int>>(static_cast<std::size_t>(h) * w);
    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx) {
            int best = 0;
            double bv = x.value().at3(y, xx, 0);
            for (int ch = 1; ch < c; ++ch) {
                const double v = x.value().at3(y, xx, ch);
                if (v > bv) {
                    bv = v;
                    best = ch;
                }
            }
            out.at3(y, xx, 0) = bv;
            (*argmax)[static_cast<std::size_t>(y) * w + xx] = best;
        }
    auto px = x.node();
    return Var(make_node(std::move(out), {px}, [px, h, w, argmax](Node& node) {
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx)
                px->grad.at3(y, xx, (*argmax)[static_cast<std::size_t>(y) * w + xx]) +=
                    node.grad.at3(y, xx, 0);
    }));
}

Var concat_channels(const Var& a, const Var& b) {
    require(a.value().rank() == 3 && b.value().rank() == 3, "concat_channels: (h,w,c) required");
    const int h = a.value().dim(0), w = a.value().dim(1);
    require(b.value().dim(0) == h && b.value().dim(1) == w, "concat_channels: size mismatch");
    const int ca = a.value().dim(2), cb = b.value().dim(2);
    Tensor out({h, w, ca + cb});
    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx) {
            for (int ch = 0; ch < ca; ++ch) out.at3(y, xx, ch) = a.value().at3(y, xx, ch);
            for (int ch = 0; ch < cb; ++ch) out.at3(y, xx, ca + ch) = b.value().at3(y, xx, ch);
        }
    auto pa = a.node(), pb = b.node();
    return Var(make_node(std::move(out), {pa, pb}, [pa, pb, h, w, ca, cb](Node& node) {
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx) {
                if (pa->requires_grad)
                    for (int ch = 0; ch < ca; ++ch)
                        pa->grad.at3(y, xx, ch) += node.grad.at3(y, xx, ch);
                if (pb->requires_grad)
                    for (int ch = 0; ch < cb; ++ch)
                        pb->grad.at3(y, xx, ch) += node.grad.at3(y, xx, ca + ch);
            }
    }));
}

Var mul_channel_gate(const Var& x, const Var& gate) {
    require(x.value().rank() == 3 && gate.value().rank() == 1, "mul_channel_gate: (h,w,c)*(c)");
    const int h = x.value().dim(0), w = x.value().dim(1), c = x.value().dim(2);
    require(gate.value().dim(0) == c, "mul_channel_gate: channel mismatch");
    Tensor out = x.value();
    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx)
            for (int ch = 0; ch < c; ++ch) out.at3(y, xx, ch) *= gate.value()[static_cast<std::size_t>(ch)];
    auto px = x.node(), pg = gate.node();
    return Var(make_node(std::move(out), {px, pg}, [px, pg, h, w, c](Node& node) {
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx)
                for (int ch = 0; ch < c; ++ch) {
                    const double g = node.grad.at3(y, xx, ch);
                    if (px->requires_grad)
                        px->grad.at3(y, xx, ch) += g * pg->value[static_cast<std::size_t>(ch)];
                    if (pg->requires_grad)
                        pg->grad[static_cast<std::size_t>(ch)] += g * px->value.at3(y, xx, ch);
                }
    }));
}

Var mul_spatial_gate(const Var& x, const Var& gate) {
    require(x.value().rank() == 3 && gate.value().rank() == 3, "mul_spatial_gate: rank mismatch");
    const int h = x.value().dim(0), w = x.value().dim(1), c = x.value().dim(2);
    require(gate.value().dim(0) == h && gate.value().dim(1) == w && gate.value().dim(2) == 1,
            "mul_spatial_gate: gate must be (h,w,1)");
    Tensor out = x.value();
    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx) {
            const double g = gate.value().at3(y, xx, 0);
            for (int ch = 0; ch < c; ++ch) out.at3(y, xx, ch) *= g;
        }
    auto px = x.node(), pg = gate.node();
    return Var(make_node(std::move(out), {px, pg}, [px, pg, h, w, c](Node& node) {
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx) {
                const double gv = pg->value.at3(y, xx, 0);
                double acc = 0.0;
                for (int ch = 0; ch < c; ++ch) {
                    const double g = node.grad.at3(y, xx, ch);
                    if (px->requires_grad) px->grad.at3(y, xx, ch) += g * gv;
                    acc += g * px->value.at3(y, xx, ch);
                }
                if (pg->requires_grad) pg->grad.at3(y, xx, 0) += acc;
            }
    }));
}

namespace {

struct CellDiff {
    double dx, dy, r; // cell-averaged central differences and their norm
};

CellDiff cell_diff(const Tensor& p, int y, int x) {
    const double dx = 0.5 * ((p.at2(y, x + 1) - p.at2(y, x)) + (p.at2(y + 1, x + 1) - p.at2(y + 1, x)));
    const double dy = 0.5 * ((p.at2(y + 1, x) - p.at2(y, x)) + (p.at2(y + 1, x + 1) - p.at2(y, x + 1)));
    return {dx, dy, std::sqrt(dx * dx + dy * dy)};
}

} // namespace

Var contour_surrogate(const Var& p, const Tensor& d_cell, double beta, double diag, double eps) {
    require(p.value().rank() == 2, "contour_surrogate: probability grid must be (h,w)");
    const int h = p.value().dim(0), w = p.value().dim(1);
    require(d_cell.rank() == 2 && d_cell.dim(0) == h - 1 && d_cell.dim(1) == w - 1,
            "contour_surrogate: d_cell must be (h-1, w-1)");
    require(diag > 0.0 && beta > 0.0, "contour_surrogate: beta and diag must be positive");

    double num = 0.0, den = 0.0;
    for (int y = 0; y + 1 < h; ++y)
        for (int x = 0; x + 1 < w; ++x) {
            const double b = std::min(cell_diff(p.value(), y, x).r, 1.0);
            num += d_cell.at2(y, x) * b;
            den += b;
        }
    // A near-flat probability map has no boundary to speak of; below one
    // full crossing of transition mass the term contributes nothing, which
    // also keeps the 1/(sum b) gradient from spiking early in training.
    if (den < 1.0) return Var::constant(Tensor::scalar(0.0));
    const double s = den + eps;
    const double loss = beta * (num / s) / diag;

    auto pp = p.node();
    return Var(make_node(Tensor::scalar(loss), {pp},
                         [pp, d_cell, beta, diag, eps, num, den, h, w](Node& node) {
        const double g = node.grad[0];
        const double s2 = den + eps;
        const double k = g * beta / diag;
        for (int y = 0; y + 1 < h; ++y)
            for (int x = 0; x + 1 < w; ++x) {
                const CellDiff cd = cell_diff(pp->value, y, x);
                if (cd.r <= 0.0 || cd.r >= 1.0) continue; // flat or clipped: zero slope
                const double g_b = k * (d_cell.at2(y, x) * s2 - num) / (s2 * s2);
                const double gx = 0.5 * g_b * cd.dx / cd.r;
                const double gy = 0.5 * g_b * cd.dy / cd.r;
                pp->grad.at2(y, x) += -gx - gy;
                pp->grad.at2(y, x + 1) += gx - gy;
                pp->grad.at2(y + 1, x) += -gx + gy;
                pp->grad.at2(y + 1, x + 1) += gx + gy;
            }
    }));
}

} // namespace fairway::ad
