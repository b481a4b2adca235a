"""Trains the small fixture network on synthetic faces and writes the
committed weights plus a forward-parity fixture.

    make_fixtures training --out train.t --count 400 --seed 0
    make_fixtures training --out parity_in.t --count 1 --seed 1000
    python3 train_toy_fsgn.py --data train.t --parity-input parity_in.t \
        --out stage1.fsgn --parity-out /dev/null --minutes 30
    python3 train_toy_fsgn.py --data train.t --parity-input parity_in.t \
        --out fsgn_toy.fsgn --parity-out fsgn_parity.t --minutes 45 \
        --init-from stage1.fsgn --mask-jitter 1.5 --seed 1
"""
import argparse
import json
import time

import numpy as np
import torch

from fsgn_torch import Fsgn, read_tensors, write_tensors


def init(model, residual_scale):
    g = torch.Generator().manual_seed(0)
    closing = {n for n in model.names if n.endswith("b")} | {"conv8"}
    for n, c in zip(model.names, model.convs):
        fan_in = c.weight.shape[1] * 9
        std = (2.0 / fan_in) ** 0.5
        w = torch.randn(c.weight.shape, generator=g) * std
        if n in closing:
            w *= residual_scale
        c.weight.data = w
        c.bias.data.zero_()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--data", required=True)
    ap.add_argument("--parity-input", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--parity-out", required=True)
    ap.add_argument("--minutes", type=float, default=25)
    ap.add_argument("--batch", type=int, default=8)
    ap.add_argument("--crop", type=int, default=48)
    ap.add_argument("--lr", type=float, default=1e-4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--init-from", help="continue from an exported weights file")
    ap.add_argument("--mask-jitter", type=float, default=0.0,
                    help="std-dev in pixels of a per-component mask shift, mimicking landmark error")
    args = ap.parse_args()

    torch.set_num_threads(1)
    torch.manual_seed(args.seed)
    rng = np.random.default_rng(args.seed)
    data = read_tensors(args.data)
    x_all = torch.from_numpy(data["input"])
    y_all = torch.from_numpy(data["target"])
    n, _, h, w = x_all.shape

    model = Fsgn()
    if args.init_from:
        model.load(args.init_from)
    else:
        init(model, 0.1)
    opt = torch.optim.Adam(model.parameters(), lr=args.lr, betas=(0.9, 0.999), eps=1e-8)
    deadline = time.time() + args.minutes * 60
    step = 0
    while time.time() < deadline:
        idx = rng.integers(0, n, args.batch)
        oy = int(rng.integers(0, h - args.crop + 1))
        ox = int(rng.integers(0, w - args.crop + 1))
        xb = x_all[idx, :, oy:oy + args.crop, ox:ox + args.crop].clone()
        if args.mask_jitter > 0:
            for b, i in enumerate(idx):
                for c in range(3, 7):
                    dy, dx = np.rint(rng.normal(0, args.mask_jitter, 2)).astype(int)
                    my = min(max(oy + dy, 0), h - args.crop)
                    mx = min(max(ox + dx, 0), w - args.crop)
                    xb[b, c] = x_all[i, c, my:my + args.crop, mx:mx + args.crop]
        yb = y_all[idx, :, oy:oy + args.crop, ox:ox + args.crop]
        loss = ((model(xb, clamp=False) - yb) ** 2).mean()
        if not torch.isfinite(loss):
            raise SystemExit("non-finite loss at step %d" % step)
        opt.zero_grad()
        loss.backward()
        opt.step()
        if step % 50 == 0:
            with torch.no_grad():
                base = ((xb[:, :3] - yb) ** 2).mean().item()
            print(json.dumps({"step": step, "loss": loss.item(), "bicubic": base}), flush=True)
        step += 1

    model.export(args.out)
    with torch.no_grad():
        xp = torch.from_numpy(read_tensors(args.parity_input)["input"])
        yp = model(xp)
    write_tensors(args.parity_out, [("input", xp.numpy()), ("output", yp.numpy())])
    print(json.dumps({"done": step}))


if __name__ == "__main__":
    main()
