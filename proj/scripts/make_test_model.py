#!/usr/bin/env python3
"""Writes small ONNX networks used by the deep-provider tests.

The networks are untrained (seeded random weights). They only need the shape
of a real feature extractor: one RGB image input, a penultimate activation
exported under a stable name, and a classification head after it.
"""
import argparse
import json

import torch
import torch.nn as nn


class TinyNet(nn.Module):
    def __init__(self, width: int):
        super().__init__()
        self.body = nn.Sequential(
            nn.Conv2d(3, 16, 5, stride=4, padding=2), nn.ReLU(),
            nn.Conv2d(16, 32, 3, stride=2, padding=1), nn.ReLU(),
            nn.AdaptiveAvgPool2d(1), nn.Flatten())
        self.penultimate = nn.Sequential(nn.Linear(32, width), nn.ReLU())
        self.head = nn.Linear(width, 10)

    def forward(self, x):
        features = self.penultimate(self.body(x))
        return self.head(features), features


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", required=True)
    parser.add_argument("--width", type=int, default=128)
    parser.add_argument("--side", type=int, default=64)
    parser.add_argument("--reference", help="also write the features of the test patch as JSON")
    args = parser.parse_args()
    torch.manual_seed(7)
    net = TinyNet(args.width).eval()
    torch.onnx.export(net, torch.zeros(1, 3, args.side, args.side), args.out,
                      input_names=["input"], output_names=["logits", "features"],
                      opset_version=11, dynamo=False)
    if args.reference:
        side = args.side
        # Same pattern as the C++ test: value = (7x + 13y + 50c) mod 256.
        x = torch.arange(side).view(1, 1, side)
        y = torch.arange(side).view(1, side, 1)
        c = torch.arange(3).view(3, 1, 1)
        patch = ((7 * x + 13 * y + 50 * c) % 256).double() / 255.0
        mean = torch.tensor([0.485, 0.456, 0.406], dtype=torch.float64).view(3, 1, 1)
        std = torch.tensor([0.229, 0.224, 0.225], dtype=torch.float64).view(3, 1, 1)
        inp = ((patch - mean) / std).float().unsqueeze(0)
        with torch.no_grad():
            _, features = net(inp)
        with open(args.reference, "w") as f:
            json.dump({"side": side, "features": features[0].tolist()}, f)


if __name__ == "__main__":
    main()
