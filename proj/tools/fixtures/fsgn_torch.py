"""Torch mirror of the C++ network plus readers/writers for the tensor file format."""
import struct

import numpy as np
import torch
import torch.nn as nn

DILATIONS = (5, 4, 3, 2, 1)
BLOCKS = 5
FEATURES = 64


def read_tensors(path):
    with open(path, "rb") as f:
        data = f.read()
    assert data[:4] == b"FSGN", "bad magic"
    version, count = struct.unpack_from("<II", data, 4)
    assert version == 1
    pos = 12
    out = {}
    for _ in range(count):
        (nlen,) = struct.unpack_from("<I", data, pos)
        pos += 4
        name = data[pos:pos + nlen].decode()
        pos += nlen
        (ndim,) = struct.unpack_from("<I", data, pos)
        pos += 4
        dims = struct.unpack_from("<%dI" % ndim, data, pos)
        pos += 4 * ndim
        n = int(np.prod(dims)) if dims else 1
        out[name] = np.frombuffer(data, dtype="<f4", count=n, offset=pos).reshape(dims).copy()
        pos += 4 * n
    return out


def write_tensors(path, tensors):
    with open(path, "wb") as f:
        f.write(b"FSGN")
        f.write(struct.pack("<II", 1, len(tensors)))
        for name, arr in tensors:
            arr = np.ascontiguousarray(arr, dtype="<f4")
            b = name.encode()
            f.write(struct.pack("<I", len(b)))
            f.write(b)
            f.write(struct.pack("<I", arr.ndim))
            f.write(struct.pack("<%dI" % arr.ndim, *arr.shape))
            f.write(arr.tobytes())


def conv(cin, cout, d):
    return nn.Conv2d(cin, cout, 3, padding=d, dilation=d)


class Fsgn(nn.Module):
    def __init__(self):
        super().__init__()
        self.names = ["conv1"]
        self.convs = nn.ModuleList([conv(7, FEATURES, 1)])
        for g, d in enumerate(DILATIONS):
            for b in range(1, BLOCKS + 1):
                for s in "ab":
                    self.names.append("conv%d_%d%s" % (g + 2, b, s))
                    self.convs.append(conv(FEATURES, FEATURES, d))
        self.names += ["conv7", "conv8"]
        self.convs.append(conv(FEATURES, FEATURES, 1))
        self.convs.append(conv(FEATURES, 3, 1))

    def forward(self, x, clamp=True):
        f1 = torch.relu(self.convs[0](x))
        h = f1
        i = 1
        for _ in range(len(DILATIONS) * BLOCKS):
            t = torch.relu(self.convs[i](h))
            h = h + self.convs[i + 1](t)
            i += 2
        h = torch.relu(self.convs[i](h)) + f1
        y = self.convs[i + 1](h) + x[:, :3]
        return y.clamp(0, 1) if clamp else y

    def export(self, path):
        out = []
        for n, c in zip(self.names, self.convs):
            out.append((n + ".weight", c.weight.detach().numpy()))
            out.append((n + ".bias", c.bias.detach().numpy()))
        write_tensors(path, out)

    def load(self, path):
        t = read_tensors(path)
        for n, c in zip(self.names, self.convs):
            c.weight.data = torch.from_numpy(t[n + ".weight"])
            c.bias.data = torch.from_numpy(t[n + ".bias"])
