"""Color-permutation-invariant regression network, trained online.

The net maps a coloring, encoded as k binary membership vectors of length
|V|, to one real number: the score the local search is expected to reach
from that coloring.  Each layer applies a per-color transform plus a
color-average ("mixing") transform,

    out_i = LeakyReLU_0.2( batchnorm( beta + V_i @ Lam + mean_j(V_j) @ Gam ) )

and the head averages the final per-color scalars, so permuting the color
groups permutes nothing but the order of an average: the output is exactly
invariant.  Batch norm pools its statistics over the batch *and* the k
color groups (per feature), which preserves that invariance; training mode
uses batch statistics and maintains running estimates (momentum 0.1) that
evaluation mode consumes, as in standard batch normalization.

Everything (forward, backprop through the batch norm, Adam) is plain numpy;
training minimizes the MSE against per-generation z-scored targets and the
stored (mean, std) pair maps predictions back to the raw score scale.
"""

from __future__ import annotations

import io
import json

import numpy as np

from .rng import TAG_NET_INIT, Stream, batch_uniform, stream_key

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


def hidden_widths(n, problem, arch):
    """Layer schedules: the full-size nets plus a reduced desk-scale one."""
    if arch == "small":
        return [2 * n, n, n // 2]
    if arch == "paper":
        if problem == "col":
            return [10 * n, 5 * n, 2 * n, 2 * n, 2 * n, 2 * n, 2 * n, n, n // 2]
        return [5 * n, 2 * n, n, n // 2]
    raise ValueError(f"unknown arch {arch!r}")


class _Layer:
    __slots__ = (
        "lam",
        "gam",
        "beta",
        "bn_scale",
        "bn_shift",
        "run_mean",
        "run_var",
        "cache",
    )

    def __init__(self, l_in, l_out, dtype, stream_key_val, counter_start):
        bound = 1.0 / np.sqrt(l_in)
        m = l_in * l_out
        u1 = batch_uniform(stream_key_val, counter_start, m)
        u2 = batch_uniform(stream_key_val, counter_start + m, m)
        self.lam = ((u1 * 2 - 1) * bound).reshape(l_in, l_out).astype(dtype)
        self.gam = ((u2 * 2 - 1) * bound).reshape(l_in, l_out).astype(dtype)
        self.beta = np.zeros(l_out, dtype=dtype)
        self.bn_scale = np.ones(l_out, dtype=dtype)
        self.bn_shift = np.zeros(l_out, dtype=dtype)
        self.run_mean = np.zeros(l_out, dtype=dtype)
        self.run_var = np.ones(l_out, dtype=dtype)
        self.cache = None

    def params(self):
        return [self.lam, self.gam, self.beta, self.bn_scale, self.bn_shift]


class SurrogateNet:
    """Deep-set regressor with persistent Adam state across generations."""

    def __init__(
        self,
        n,
        problem="wvcp",
        arch="small",
        widths=None,
        seed=0,
        dtype=np.float32,
        lr=0.001,
        leaky_slope=0.2,
        bn_eps=1e-5,
        bn_momentum=0.1,
        use_bn=True,
    ):
        self.n = int(n)
        self.problem = problem
        self.arch = arch
        self.dtype = np.dtype(dtype)
        self.lr = float(lr)
        self.slope = float(leaky_slope)
        self.bn_eps = float(bn_eps)
        self.bn_momentum = float(bn_momentum)
        self.use_bn = bool(use_bn)
        if widths is None:
            widths = hidden_widths(self.n, problem, arch)
        self.widths = [self.n] + [int(w) for w in widths] + [1]

        key = stream_key(seed, TAG_NET_INIT)
        counter = 0
        self.layers = []
        for l_in, l_out in zip(self.widths[:-1], self.widths[1:]):
            self.layers.append(_Layer(l_in, l_out, self.dtype, key, counter))
            counter += 2 * l_in * l_out

        self.adam_m = [np.zeros_like(p) for layer in self.layers for p in layer.params()]
        self.adam_v = [np.zeros_like(p) for layer in self.layers for p in layer.params()]
        self.adam_t = 0
        self.target_mean = 0.0
        self.target_std = 1.0
        self.train_events = []

    # ----- encoding -----

    def one_hot(self, assigns, k):
        """(B, n) color ids -> (B, k, n) binary membership rows."""
        assigns = np.asarray(assigns)
        if assigns.ndim == 1:
            assigns = assigns[None, :]
        B, n = assigns.shape
        if n != self.n:
            raise ValueError(f"expected {self.n} vertices, got {n}")
        x = np.zeros((B, k, n), dtype=self.dtype)
        x[np.arange(B)[:, None], assigns, np.arange(n)[None, :]] = 1
        return x

    # ----- forward / backward -----

    def forward(self, x, mode="eval", keep_cache=False, update_running=True):
        """x: (B, k, n) -> (B,) in z-score space."""
        if mode not in ("train", "eval"):
            raise ValueError("mode must be 'train' or 'eval'")
        if x.ndim != 3 or x.shape[2] != self.n:
            raise ValueError(f"bad input shape {x.shape}, need (B, k, {self.n})")
        x = x.astype(self.dtype, copy=False)
        B, k, _ = x.shape
        for layer in self.layers:
            rho = x.mean(axis=1)
            z = x @ layer.lam + (rho @ layer.gam)[:, None, :] + layer.beta
            if self.use_bn:
                if mode == "train":
                    mu = z.mean(axis=(0, 1))
                    var = z.var(axis=(0, 1))
                    if update_running:
                        nstat = B * k
                        unb = var * (nstat / (nstat - 1)) if nstat > 1 else var
                        mom = self.bn_momentum
                        layer.run_mean = ((1 - mom) * layer.run_mean + mom * mu).astype(
                            self.dtype
                        )
                        layer.run_var = ((1 - mom) * layer.run_var + mom * unb).astype(
                            self.dtype
                        )
                else:
                    mu = layer.run_mean
                    var = layer.run_var
                inv_std = 1.0 / np.sqrt(var + self.bn_eps)
                zhat = (z - mu) * inv_std
                pre = zhat * layer.bn_scale + layer.bn_shift
            else:
                zhat = None
                inv_std = None
                mu = None
                pre = z
            y = np.where(pre > 0, pre, self.slope * pre)
            if keep_cache:
                layer.cache = (x, rho, z, mu, inv_std, zhat, pre)
            x = y
        out = x.mean(axis=1)[:, 0]
        return out

    def _backward(self, dout, mode="train"):
        """Backprop from d(out) (B,); returns flat gradient list."""
        B = dout.shape[0]
        grads = []
        k = self.layers[0].cache[0].shape[1]
        dy = np.broadcast_to(
            (dout / k)[:, None, None], (B, k, 1)
        ).astype(self.dtype)
        for layer in reversed(self.layers):
            x, rho, z, mu, inv_std, zhat, pre = layer.cache
            dpre = dy * np.where(pre > 0, 1.0, self.slope).astype(self.dtype)
            if self.use_bn:
                dbn_scale = (dpre * zhat).sum(axis=(0, 1))
                dbn_shift = dpre.sum(axis=(0, 1))
                dzhat = dpre * layer.bn_scale
                if mode == "train":
                    nstat = x.shape[0] * x.shape[1]
                    zc = z - mu
                    dvar = (dzhat * zc).sum(axis=(0, 1)) * (-0.5) * inv_std**3
                    dmu = -(dzhat.sum(axis=(0, 1))) * inv_std + dvar * (
                        -2.0 / nstat
                    ) * zc.sum(axis=(0, 1))
                    dz = dzhat * inv_std + dvar * (2.0 / nstat) * zc + dmu / nstat
                else:
                    dz = dzhat * inv_std
            else:
                dbn_scale = np.zeros_like(layer.bn_scale)
                dbn_shift = np.zeros_like(layer.bn_shift)
                dz = dpre
            dlam = np.einsum("bil,biL->lL", x, dz)
            dsum = dz.sum(axis=1)
            dgam = rho.T @ dsum
            dbeta = dz.sum(axis=(0, 1))
            dx = dz @ layer.lam.T + ((dsum @ layer.gam.T) / x.shape[1])[:, None, :]
            grads.append([dlam, dgam, dbeta, dbn_scale, dbn_shift])
            dy = dx
        grads.reverse()
        return [g for layer_grads in grads for g in layer_grads]

    # ----- training -----

    def _flat_params(self):
        return [p for layer in self.layers for p in layer.params()]

    def _adam_step(self, grads):
        self.adam_t += 1
        t = self.adam_t
        lr_t = self.lr * np.sqrt(1 - ADAM_BETA2**t) / (1 - ADAM_BETA1**t)
        for p, g, m, v in zip(self._flat_params(), grads, self.adam_m, self.adam_v):
            g = g.astype(p.dtype)
            m *= ADAM_BETA1
            m += (1 - ADAM_BETA1) * g
            v *= ADAM_BETA2
            v += (1 - ADAM_BETA2) * g * g
            p -= lr_t * m / (np.sqrt(v) + ADAM_EPS)

    def _snapshot(self):
        return (
            [p.copy() for p in self._flat_params()],
            [m.copy() for m in self.adam_m],
            [v.copy() for v in self.adam_v],
            self.adam_t,
            [(layer.run_mean.copy(), layer.run_var.copy()) for layer in self.layers],
        )

    def _restore(self, snap):
        params, ms, vs, t, running = snap
        for p, saved in zip(self._flat_params(), params):
            p[...] = saved
        for m, saved in zip(self.adam_m, ms):
            m[...] = saved
        for v, saved in zip(self.adam_v, vs):
            v[...] = saved
        self.adam_t = t
        for layer, (rm, rv) in zip(self.layers, running):
            layer.run_mean = rm
            layer.run_var = rv

    def train_generation(self, assigns, targets, k, epochs, batch_size, stream):
        """N epochs of minibatch Adam on MSE against z-scored targets.

        Continues from the current parameters and Adam moments (online
        training).  A non-finite loss aborts the generation's training and
        restores the pre-training state.  Returns per-epoch mean losses.
        """
        assigns = np.asarray(assigns)
        targets = np.asarray(targets, dtype=np.float64)
        if len(targets) < 1:
            raise ValueError("need at least one training example")
        tm = float(targets.mean())
        ts = float(targets.std())
        if ts == 0.0:
            ts = 1.0
        self.target_mean = tm
        self.target_std = ts
        y = ((targets - tm) / ts).astype(self.dtype)

        snap = self._snapshot()
        losses = []
        order = np.arange(len(y))
        for _epoch in range(epochs):
            stream.shuffle(order)
            epoch_losses = []
            for lo in range(0, len(y), batch_size):
                idx = order[lo : lo + batch_size]
                x = self.one_hot(assigns[idx], k)
                pred = self.forward(x, mode="train", keep_cache=True)
                err = pred - y[idx]
                loss = float(np.mean(err.astype(np.float64) ** 2))
                if not np.isfinite(loss):
                    self._restore(snap)
                    self.train_events.append("non-finite loss; training aborted")
                    return losses
                dout = (2.0 * err / len(idx)).astype(self.dtype)
                grads = self._backward(dout, mode="train")
                self._adam_step(grads)
                epoch_losses.append(loss)
            if not all(np.isfinite(p).all() for p in self._flat_params()):
                self._restore(snap)
                self.train_events.append("non-finite parameters; training aborted")
                return losses
            losses.append(float(np.mean(epoch_losses)))
        for layer in self.layers:
            layer.cache = None
        return losses

    # ----- inference -----

    def predict_batch(self, x, chunk=1024):
        """Eval-mode forward on pre-encoded (B, k, n) inputs, z-score scale."""
        outs = []
        for lo in range(0, x.shape[0], chunk):
            outs.append(self.forward(x[lo : lo + chunk], mode="eval"))
        return np.concatenate(outs) if outs else np.empty(0)

    def predict_assigns(self, assigns, k, chunk=1024):
        """Raw-score-scale predictions for (B, n) color assignments."""
        assigns = np.asarray(assigns)
        if assigns.ndim == 1:
            assigns = assigns[None, :]
        outs = []
        for lo in range(0, assigns.shape[0], chunk):
            x = self.one_hot(assigns[lo : lo + chunk], k)
            outs.append(self.forward(x, mode="eval"))
        z = np.concatenate(outs) if outs else np.empty(0)
        return z.astype(np.float64) * self.target_std + self.target_mean

    # ----- checkpointing -----

    def save(self, path):
        """Versioned .npz checkpoint of parameters, Adam state and config."""
        meta = {
            "format_version": 1,
            "n": self.n,
            "problem": self.problem,
            "arch": self.arch,
            "widths": self.widths,
            "dtype": self.dtype.name,
            "lr": self.lr,
            "slope": self.slope,
            "bn_eps": self.bn_eps,
            "bn_momentum": self.bn_momentum,
            "use_bn": self.use_bn,
            "adam_t": self.adam_t,
            "target_mean": self.target_mean,
            "target_std": self.target_std,
        }
        arrays = {"meta": np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8)}
        for i, layer in enumerate(self.layers):
            arrays[f"l{i}_lam"] = layer.lam
            arrays[f"l{i}_gam"] = layer.gam
            arrays[f"l{i}_beta"] = layer.beta
            arrays[f"l{i}_bn_scale"] = layer.bn_scale
            arrays[f"l{i}_bn_shift"] = layer.bn_shift
            arrays[f"l{i}_run_mean"] = layer.run_mean
            arrays[f"l{i}_run_var"] = layer.run_var
        for j, (m, v) in enumerate(zip(self.adam_m, self.adam_v)):
            arrays[f"adam_m{j}"] = m
            arrays[f"adam_v{j}"] = v
        if hasattr(path, "write"):
            np.savez(path, **arrays)
        else:
            with open(path, "wb") as f:
                np.savez(f, **arrays)

    @classmethod
    def load(cls, path):
        data = np.load(path) if not hasattr(path, "read") else np.load(io.BytesIO(path.read()))
        meta = json.loads(bytes(data["meta"]).decode())
        if meta["format_version"] != 1:
            raise ValueError(f"unsupported checkpoint version {meta['format_version']}")
        net = cls(
            meta["n"],
            problem=meta["problem"],
            arch=meta["arch"],
            widths=meta["widths"][1:-1],
            dtype=np.dtype(meta["dtype"]),
            lr=meta["lr"],
            leaky_slope=meta["slope"],
            bn_eps=meta["bn_eps"],
            bn_momentum=meta["bn_momentum"],
            use_bn=meta["use_bn"],
        )
        for i, layer in enumerate(net.layers):
            layer.lam = data[f"l{i}_lam"]
            layer.gam = data[f"l{i}_gam"]
            layer.beta = data[f"l{i}_beta"]
            layer.bn_scale = data[f"l{i}_bn_scale"]
            layer.bn_shift = data[f"l{i}_bn_shift"]
            layer.run_mean = data[f"l{i}_run_mean"]
            layer.run_var = data[f"l{i}_run_var"]
        net.adam_m = [data[f"adam_m{j}"].copy() for j in range(len(net.adam_m))]
        net.adam_v = [data[f"adam_v{j}"].copy() for j in range(len(net.adam_v))]
        net.adam_t = meta["adam_t"]
        net.target_mean = meta["target_mean"]
        net.target_std = meta["target_std"]
        return net
