#include "apiseq/seq2seq/tape.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <memory>

#include "apiseq/error.hpp"

namespace apiseq::seq2seq {

namespace {

void require(bool ok, const char* op, const std::string& what) {
  if (!ok) throw ShapeMismatch(std::string(op) + ": " + what);
}

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Var Tape::push(Matrix value, bool needs_grad) {
  Node n;
  n.own = std::move(value);
  n.needs_grad = needs_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Matrix value) { return push(std::move(value), false); }

Var Tape::param(Parameter& p) {
  Node n;
  n.param = &p;
  n.needs_grad = true;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Matrix& Tape::value(Var v) const {
  const Node& n = nodes_[static_cast<std::size_t>(v.id)];
  return n.param ? n.param->value : n.own;
}

template <typename Expr>
void Tape::accum(Var v, const Expr& g) {
  Node& n = node(v);
  if (!n.needs_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::backward(Var loss) {
  require(value(loss).size() == 1, "backward", "loss must be 1x1, got " + dims(value(loss)));
  node(loss).grad = Matrix::Ones(1, 1);
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.grad.size() == 0 || !n.back) continue;
    n.back();
  }
  for (auto& n : nodes_) {
    if (!n.param || n.grad.size() == 0) continue;
    if (n.param->grad.size() == 0) {
      n.param->grad = Matrix::Zero(n.param->value.rows(), n.param->value.cols());
    }
    n.param->grad += n.grad;
  }
}

Var Tape::matmul(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  require(A.cols() == B.rows(), "matmul", dims(A) + " * " + dims(B));
  Matrix out(A.rows(), B.cols());
  out.noalias() = A * B;
  Var r = push(std::move(out), needs(a) || needs(b));
  node(r).back = [this, a, b, r] {
    const Matrix& g = grad_of(r);
    if (needs(a)) accum(a, g * value(b).transpose());
    if (needs(b)) accum(b, value(a).transpose() * g);
  };
  return r;
}

Var Tape::matmul_nt(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  require(A.cols() == B.cols(), "matmul_nt", dims(A) + " * T(" + dims(B) + ")");
  Matrix out(A.rows(), B.rows());
  out.noalias() = A * B.transpose();
  Var r = push(std::move(out), needs(a) || needs(b));
  node(r).back = [this, a, b, r] {
    const Matrix& g = grad_of(r);
    if (needs(a)) accum(a, g * value(b));
    if (needs(b)) accum(b, g.transpose() * value(a));
  };
  return r;
}

Var Tape::add(Var a, Var b) {
  require(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols(), "add",
          dims(value(a)) + " + " + dims(value(b)));
  Var r = push(value(a) + value(b), needs(a) || needs(b));
  node(r).back = [this, a, b, r] {
    accum(a, grad_of(r));
    accum(b, grad_of(r));
  };
  return r;
}

Var Tape::add_bias(Var x, Var bias) {
  const Matrix& X = value(x);
  const Matrix& B = value(bias);
  require(B.rows() == 1 && B.cols() == X.cols(), "add_bias", dims(X) + " + " + dims(B));
  Matrix out = X;
  out.rowwise() += B.row(0);
  Var r = push(std::move(out), needs(x) || needs(bias));
  node(r).back = [this, x, bias, r] {
    accum(x, grad_of(r));
    if (needs(bias)) accum(bias, grad_of(r).colwise().sum());
  };
  return r;
}

Var Tape::mul(Var a, Var b) {
  require(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols(), "mul",
          dims(value(a)) + " .* " + dims(value(b)));
  Var r = push(value(a).cwiseProduct(value(b)), needs(a) || needs(b));
  node(r).back = [this, a, b, r] {
    if (needs(a)) accum(a, grad_of(r).cwiseProduct(value(b)));
    if (needs(b)) accum(b, grad_of(r).cwiseProduct(value(a)));
  };
  return r;
}

Var Tape::scale(Var a, double s) {
  Var r = push(value(a) * s, needs(a));
  node(r).back = [this, a, r, s] { accum(a, grad_of(r) * s); };
  return r;
}

Var Tape::add_const(Var a, const Matrix& c) {
  require(value(a).rows() == c.rows() && value(a).cols() == c.cols(), "add_const",
          dims(value(a)) + " + " + dims(c));
  Var r = push(value(a) + c, needs(a));
  node(r).back = [this, a, r] { accum(a, grad_of(r)); };
  return r;
}

Var Tape::tanh(Var a) {
  Var r = push(value(a).array().tanh().matrix(), needs(a));
  node(r).back = [this, a, r] {
    const Matrix& y = value(r);
    accum(a, grad_of(r).cwiseProduct((1.0 - y.array().square()).matrix()));
  };
  return r;
}

Var Tape::sigmoid(Var a) {
  Var r = push((1.0 / (1.0 + (-value(a).array()).exp())).matrix(), needs(a));
  node(r).back = [this, a, r] {
    const Matrix& y = value(r);
    accum(a, grad_of(r).cwiseProduct((y.array() * (1.0 - y.array())).matrix()));
  };
  return r;
}

Var Tape::relu(Var a) {
  Var r = push(value(a).cwiseMax(0.0), needs(a));
  node(r).back = [this, a, r] {
    accum(a, (value(a).array() > 0.0).select(grad_of(r), 0.0).matrix());
  };
  return r;
}

Var Tape::layer_norm(Var x, Var gamma, Var beta, double eps) {
  const Matrix& X = value(x);
  const Matrix& G = value(gamma);
  const Matrix& B = value(beta);
  require(G.rows() == 1 && G.cols() == X.cols() && B.rows() == 1 && B.cols() == X.cols(),
          "layer_norm", dims(X) + " with gamma " + dims(G) + ", beta " + dims(B));
  const Eigen::Index n = X.cols();
  auto xhat = std::make_shared<Matrix>(X.rows(), n);
  auto inv_std = std::make_shared<Eigen::VectorXd>(X.rows());
  Matrix out(X.rows(), n);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double mu = X.row(i).mean();
    const double var = (X.row(i).array() - mu).square().mean();
    (*inv_std)(i) = 1.0 / std::sqrt(var + eps);
    xhat->row(i) = (X.row(i).array() - mu) * (*inv_std)(i);
    out.row(i) = xhat->row(i).cwiseProduct(G.row(0)) + B.row(0);
  }
  Var r = push(std::move(out), needs(x) || needs(gamma) || needs(beta));
  node(r).back = [this, x, gamma, beta, r, xhat, inv_std, n] {
    const Matrix& g = grad_of(r);
    if (needs(gamma)) accum(gamma, g.cwiseProduct(*xhat).colwise().sum());
    if (needs(beta)) accum(beta, g.colwise().sum());
    if (!needs(x)) return;
    const Matrix& G = value(gamma);
    Matrix dx(g.rows(), n);
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const RowVector dxhat = g.row(i).cwiseProduct(G.row(0));
      const double s1 = dxhat.sum();
      const double s2 = dxhat.dot(xhat->row(i));
      dx.row(i) = ((static_cast<double>(n) * dxhat.array() - s1 - xhat->row(i).array() * s2) *
                   ((*inv_std)(i) / static_cast<double>(n)))
                      .matrix();
    }
    accum(x, dx);
  };
  return r;
}

Var Tape::gather_rows(Var table, const std::vector<int>& ids) {
  const Matrix& T = value(table);
  Matrix out(static_cast<Eigen::Index>(ids.size()), T.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] >= 0 && ids[i] < T.rows(), "gather_rows",
            "id " + std::to_string(ids[i]) + " outside " + dims(T));
    out.row(static_cast<Eigen::Index>(i)) = T.row(ids[i]);
  }
  Var r = push(std::move(out), needs(table));
  node(r).back = [this, table, r, ids] {
    Node& t = node(table);
    if (!t.needs_grad) return;
    const Matrix& T = value(table);
    if (t.grad.size() == 0) t.grad = Matrix::Zero(T.rows(), T.cols());
    const Matrix& g = grad_of(r);
    for (std::size_t i = 0; i < ids.size(); ++i) t.grad.row(ids[i]) += g.row(static_cast<Eigen::Index>(i));
  };
  return r;
}

Var Tape::dropout(Var x, double p) {
  if (!training_ || p <= 0.0 || rng_ == nullptr) return x;
  const Matrix& X = value(x);
  Matrix mask(X.rows(), X.cols());
  const double keep = 1.0 - p;
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng_->uniform() < keep ? 1.0 / keep : 0.0;
  Var r = push(X.cwiseProduct(mask), needs(x));
  node(r).back = [this, x, r, mask = std::move(mask)] { accum(x, grad_of(r).cwiseProduct(mask)); };
  return r;
}

Var Tape::concat_cols(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  require(A.rows() == B.rows(), "concat_cols", dims(A) + " | " + dims(B));
  Matrix out(A.rows(), A.cols() + B.cols());
  out << A, B;
  const Eigen::Index ca = A.cols(), cb = B.cols();
  Var r = push(std::move(out), needs(a) || needs(b));
  node(r).back = [this, a, b, r, ca, cb] {
    accum(a, grad_of(r).leftCols(ca));
    accum(b, grad_of(r).rightCols(cb));
  };
  return r;
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_rows", "no parts");
  Eigen::Index rows = 0;
  const Eigen::Index cols = value(parts[0]).cols();
  bool any = false;
  for (Var p : parts) {
    require(value(p).cols() == cols, "concat_rows", "column mismatch " + dims(value(p)));
    rows += value(p).rows();
    any = any || needs(p);
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    out.middleRows(at, value(p).rows()) = value(p);
    at += value(p).rows();
  }
  Var r = push(std::move(out), any);
  node(r).back = [this, parts, r] {
    Eigen::Index at = 0;
    for (Var p : parts) {
      const Eigen::Index n = value(p).rows();
      accum(p, grad_of(r).middleRows(at, n));
      at += n;
    }
  };
  return r;
}

Var Tape::slice_rows(Var x, int begin, int count) {
  const Matrix& X = value(x);
  require(begin >= 0 && count >= 0 && begin + count <= X.rows(), "slice_rows",
          "rows [" + std::to_string(begin) + ", +" + std::to_string(count) + ") of " + dims(X));
  Var r = push(X.middleRows(begin, count), needs(x));
  node(r).back = [this, x, r, begin, count] {
    Node& n = node(x);
    if (!n.needs_grad) return;
    if (n.grad.size() == 0) n.grad = Matrix::Zero(value(x).rows(), value(x).cols());
    n.grad.middleRows(begin, count) += grad_of(r);
  };
  return r;
}

Var Tape::mean_rows(Var x) {
  const Matrix& X = value(x);
  require(X.rows() > 0, "mean_rows", "empty input");
  Var r = push(X.colwise().mean(), needs(x));
  node(r).back = [this, x, r] {
    const auto n = value(x).rows();
    accum(x, grad_of(r).replicate(n, 1) / static_cast<double>(n));
  };
  return r;
}

Var Tape::softmax_rows(Var x) {
  Matrix y = value(x);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    y.row(i).array() -= y.row(i).maxCoeff();
    y.row(i) = y.row(i).array().exp().matrix();
    y.row(i) /= y.row(i).sum();
  }
  Var r = push(std::move(y), needs(x));
  node(r).back = [this, x, r] {
    const Matrix& y = value(r);
    const Matrix& g = grad_of(r);
    Matrix dx(y.rows(), y.cols());
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const double dot = g.row(i).dot(y.row(i));
      dx.row(i) = y.row(i).array() * (g.row(i).array() - dot);
    }
    accum(x, dx);
  };
  return r;
}

Var Tape::sum(Var x) {
  Var r = push(Matrix::Constant(1, 1, value(x).sum()), needs(x));
  node(r).back = [this, x, r] {
    accum(x, Matrix::Constant(value(x).rows(), value(x).cols(), grad_of(r)(0, 0)));
  };
  return r;
}

Var Tape::attention(Var q, Var k, Var v, const Segments& q_seg, const Segments& k_seg, int heads,
                    bool causal) {
  const Matrix& Q = value(q);
  const Matrix& K = value(k);
  const Matrix& V = value(v);
  const Eigen::Index d = Q.cols();
  require(heads > 0 && d % heads == 0, "attention", "width " + std::to_string(d) + " not divisible by heads");
  require(K.cols() == d && V.cols() == d && K.rows() == V.rows(), "attention",
          "q " + dims(Q) + ", k " + dims(K) + ", v " + dims(V));
  require(q_seg.size() == k_seg.size() && q_seg.size() >= 1 && q_seg.back() == Q.rows() &&
              k_seg.back() == K.rows(),
          "attention", "segment offsets disagree with inputs");
  const Eigen::Index dh = d / heads;
  const double inv = 1.0 / std::sqrt(static_cast<double>(dh));
  const std::size_t n_seg = q_seg.size() - 1;
  // probs[s * heads + h] is the (Tq × Tk) attention matrix.
  auto probs = std::make_shared<std::vector<Matrix>>(n_seg * static_cast<std::size_t>(heads));
  Matrix out = Matrix::Zero(Q.rows(), d);
  for (std::size_t s = 0; s < n_seg; ++s) {
    const int q0 = q_seg[s], tq = q_seg[s + 1] - q_seg[s];
    const int k0 = k_seg[s], tk = k_seg[s + 1] - k_seg[s];
    require(!causal || tq == tk, "attention", "causal segments must be square");
    for (int h = 0; h < heads; ++h) {
      Matrix S(tq, tk);
      S.noalias() = Q.block(q0, h * dh, tq, dh) * K.block(k0, h * dh, tk, dh).transpose();
      S *= inv;
      for (int i = 0; i < tq; ++i) {
        if (causal) {
          for (int j = i + 1; j < tk; ++j) S(i, j) = -std::numeric_limits<double>::infinity();
        }
        const double mx = S.row(i).maxCoeff();
        S.row(i) = (S.row(i).array() - mx).exp().matrix();
        S.row(i) /= S.row(i).sum();
      }
      out.block(q0, h * dh, tq, dh).noalias() = S * V.block(k0, h * dh, tk, dh);
      (*probs)[s * static_cast<std::size_t>(heads) + static_cast<std::size_t>(h)] = std::move(S);
    }
  }
  Var r = push(std::move(out), needs(q) || needs(k) || needs(v));
  node(r).back = [this, q, k, v, r, q_seg, k_seg, heads, dh, inv, probs] {
    const Matrix& Q = value(q);
    const Matrix& K = value(k);
    const Matrix& V = value(v);
    const Matrix& G = grad_of(r);
    Matrix dQ = Matrix::Zero(Q.rows(), Q.cols());
    Matrix dK = Matrix::Zero(K.rows(), K.cols());
    Matrix dV = Matrix::Zero(V.rows(), V.cols());
    for (std::size_t s = 0; s + 1 < q_seg.size(); ++s) {
      const int q0 = q_seg[s], tq = q_seg[s + 1] - q_seg[s];
      const int k0 = k_seg[s], tk = k_seg[s + 1] - k_seg[s];
      for (int h = 0; h < heads; ++h) {
        const Matrix& P = (*probs)[s * static_cast<std::size_t>(heads) + static_cast<std::size_t>(h)];
        const auto g = G.block(q0, h * dh, tq, dh);
        dV.block(k0, h * dh, tk, dh).noalias() += P.transpose() * g;
        Matrix dP(tq, tk);
        dP.noalias() = g * V.block(k0, h * dh, tk, dh).transpose();
        for (int i = 0; i < tq; ++i) {
          const double dot = dP.row(i).dot(P.row(i));
          dP.row(i) = (P.row(i).array() * (dP.row(i).array() - dot)).matrix();
        }
        dP *= inv;
        dQ.block(q0, h * dh, tq, dh).noalias() += dP * K.block(k0, h * dh, tk, dh);
        dK.block(k0, h * dh, tk, dh).noalias() += dP.transpose() * Q.block(q0, h * dh, tq, dh);
      }
    }
    accum(q, dQ);
    accum(k, dK);
    accum(v, dV);
  };
  return r;
}

Var Tape::additive_attention(Var qp, Var kp, Var w, Var values) {
  const Matrix& A = value(qp);
  const Matrix& B = value(kp);
  const Matrix& W = value(w);
  const Matrix& H = value(values);
  require(A.cols() == B.cols() && W.rows() == 1 && W.cols() == A.cols() && H.rows() == B.rows() &&
              B.rows() > 0,
          "additive_attention",
          "q " + dims(A) + ", k " + dims(B) + ", w " + dims(W) + ", values " + dims(H));
  const Eigen::Index tq = A.rows(), tk = B.rows();
  auto alpha = std::make_shared<Matrix>(tq, tk);
  for (Eigen::Index t = 0; t < tq; ++t) {
    for (Eigen::Index j = 0; j < tk; ++j) {
      (*alpha)(t, j) = W.row(0).dot((A.row(t) + B.row(j)).array().tanh().matrix());
    }
    const double mx = alpha->row(t).maxCoeff();
    alpha->row(t) = (alpha->row(t).array() - mx).exp().matrix();
    alpha->row(t) /= alpha->row(t).sum();
  }
  Matrix out(tq, H.cols());
  out.noalias() = (*alpha) * H;
  Var r = push(std::move(out), needs(qp) || needs(kp) || needs(w) || needs(values));
  node(r).back = [this, qp, kp, w, values, r, alpha] {
    const Matrix& A = value(qp);
    const Matrix& B = value(kp);
    const Matrix& W = value(w);
    const Matrix& H = value(values);
    const Matrix& G = grad_of(r);
    if (needs(values)) accum(values, alpha->transpose() * G);
    Matrix de(alpha->rows(), alpha->cols());
    de.noalias() = G * H.transpose();
    for (Eigen::Index t = 0; t < de.rows(); ++t) {
      const double dot = de.row(t).dot(alpha->row(t));
      de.row(t) = (alpha->row(t).array() * (de.row(t).array() - dot)).matrix();
    }
    Matrix dA = Matrix::Zero(A.rows(), A.cols());
    Matrix dB = Matrix::Zero(B.rows(), B.cols());
    Matrix dW = Matrix::Zero(1, W.cols());
    for (Eigen::Index t = 0; t < A.rows(); ++t) {
      for (Eigen::Index j = 0; j < B.rows(); ++j) {
        const RowVector u = (A.row(t) + B.row(j)).array().tanh().matrix();
        dW.row(0) += de(t, j) * u;
        const RowVector dpre = (de(t, j) * W.row(0).array() * (1.0 - u.array().square())).matrix();
        dA.row(t) += dpre;
        dB.row(j) += dpre;
      }
    }
    accum(qp, dA);
    accum(kp, dB);
    accum(w, dW);
  };
  return r;
}

Var Tape::gru(Var x, Var h0, Var wx, Var wh, Var bx, Var bh) {
  const Matrix& X = value(x);
  const Matrix& H0 = value(h0);
  const Matrix& Wx = value(wx);
  const Matrix& Wh = value(wh);
  const Matrix& Bx = value(bx);
  const Matrix& Bh = value(bh);
  const Eigen::Index hdim = H0.cols();
  require(H0.rows() == 1 && Wx.rows() == X.cols() && Wx.cols() == 3 * hdim && Wh.rows() == hdim &&
              Wh.cols() == 3 * hdim && Bx.rows() == 1 && Bx.cols() == 3 * hdim && Bh.rows() == 1 &&
              Bh.cols() == 3 * hdim,
          "gru", "x " + dims(X) + ", h0 " + dims(H0) + ", wx " + dims(Wx) + ", wh " + dims(Wh));
  const Eigen::Index T = X.rows();
  struct Cache {
    Matrix r, z, n, ghn, hprev;
  };
  auto c = std::make_shared<Cache>();
  c->r.resize(T, hdim);
  c->z.resize(T, hdim);
  c->n.resize(T, hdim);
  c->ghn.resize(T, hdim);
  c->hprev.resize(T, hdim);
  Matrix gx(T, 3 * hdim);
  gx.noalias() = X * Wx;
  gx.rowwise() += Bx.row(0);
  Matrix out(T, hdim);
  RowVector h = H0.row(0);
  RowVector gh(3 * hdim);
  for (Eigen::Index t = 0; t < T; ++t) {
    c->hprev.row(t) = h;
    gh.noalias() = h * Wh;
    gh += Bh.row(0);
    const auto gxt = gx.row(t);
    c->r.row(t) = (1.0 / (1.0 + (-(gxt.segment(0, hdim) + gh.segment(0, hdim)).array()).exp())).matrix();
    c->z.row(t) = (1.0 / (1.0 + (-(gxt.segment(hdim, hdim) + gh.segment(hdim, hdim)).array()).exp())).matrix();
    c->ghn.row(t) = gh.segment(2 * hdim, hdim);
    c->n.row(t) = (gxt.segment(2 * hdim, hdim).array() + c->r.row(t).array() * c->ghn.row(t).array()).tanh().matrix();
    h = ((1.0 - c->z.row(t).array()) * c->n.row(t).array() + c->z.row(t).array() * h.array()).matrix();
    out.row(t) = h;
  }
  Var r = push(std::move(out), needs(x) || needs(h0) || needs(wx) || needs(wh) || needs(bx) || needs(bh));
  node(r).back = [this, x, h0, wx, wh, bx, bh, r, c, hdim] {
    const Matrix& X = value(x);
    const Matrix& Wx = value(wx);
    const Matrix& Wh = value(wh);
    const Matrix& G = grad_of(r);
    const Eigen::Index T = X.rows();
    Matrix dgx(T, 3 * hdim);
    Matrix dWh = Matrix::Zero(hdim, 3 * hdim);
    RowVector dbh = RowVector::Zero(3 * hdim);
    RowVector dnext = RowVector::Zero(hdim);
    RowVector dgh(3 * hdim);
    for (Eigen::Index t = T - 1; t >= 0; --t) {
      const RowVector dh = G.row(t) + dnext;
      const auto rr = c->r.row(t).array();
      const auto zz = c->z.row(t).array();
      const auto nn = c->n.row(t).array();
      const auto hp = c->hprev.row(t).array();
      const auto dn_pre = (dh.array() * (1.0 - zz) * (1.0 - nn.square())).eval();
      const auto dz_pre = (dh.array() * (hp - nn) * zz * (1.0 - zz)).eval();
      const auto dr_pre = (dn_pre * c->ghn.row(t).array() * rr * (1.0 - rr)).eval();
      dgx.row(t) << dr_pre.matrix(), dz_pre.matrix(), dn_pre.matrix();
      dgh << dr_pre.matrix(), dz_pre.matrix(), (dn_pre * rr).matrix();
      dWh.noalias() += c->hprev.row(t).transpose() * dgh;
      dbh += dgh;
      dnext = (dh.array() * zz).matrix();
      dnext.noalias() += dgh * Wh.transpose();
    }
    accum(h0, dnext);
    accum(wh, dWh);
    accum(bh, dbh);
    if (needs(wx)) accum(wx, X.transpose() * dgx);
    if (needs(bx)) accum(bx, dgx.colwise().sum());
    if (needs(x)) accum(x, dgx * Wx.transpose());
  };
  return r;
}

Var Tape::cross_entropy(Var logits, const std::vector<int>& targets, double smoothing) {
  const Matrix& Z = value(logits);
  require(static_cast<Eigen::Index>(targets.size()) == Z.rows(), "cross_entropy",
          std::to_string(targets.size()) + " targets for " + dims(Z));
  const Eigen::Index vocab = Z.cols();
  auto probs = std::make_shared<Matrix>(Z.rows(), vocab);
  double total = 0.0;
  int counted = 0;
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    const int t = targets[static_cast<std::size_t>(i)];
    if (t < 0) continue;
    require(t < vocab, "cross_entropy", "target " + std::to_string(t) + " outside vocabulary");
    const double mx = Z.row(i).maxCoeff();
    const double lse = mx + std::log((Z.row(i).array() - mx).exp().sum());
    probs->row(i) = (Z.row(i).array() - lse).exp().matrix();
    const double nll = lse - Z(i, t);
    const double uniform = lse - Z.row(i).mean();
    total += (1.0 - smoothing) * nll + smoothing * uniform;
    ++counted;
  }
  const double n = counted > 0 ? counted : 1;
  Var r = push(Matrix::Constant(1, 1, total / n), needs(logits));
  node(r).back = [this, logits, r, targets, smoothing, probs, n, vocab] {
    const double g = grad_of(r)(0, 0) / n;
    Matrix dz = Matrix::Zero(probs->rows(), vocab);
    for (Eigen::Index i = 0; i < dz.rows(); ++i) {
      const int t = targets[static_cast<std::size_t>(i)];
      if (t < 0) continue;
      dz.row(i) = probs->row(i).array() - smoothing / static_cast<double>(vocab);
      dz(i, t) -= 1.0 - smoothing;
      dz.row(i) *= g;
    }
    accum(logits, dz);
  };
  return r;
}

}  // namespace apiseq::seq2seq
