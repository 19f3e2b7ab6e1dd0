#!/usr/bin/env python3
"""Generates the synthetic speech-like test utterances checked in next to
this script. Deterministic; rerun only if the corpus needs to change."""

import wave

import numpy as np


def speech_like(duration_s, sr, seed):
    """Harmonic source with pitch vibrato, slow formant-style amplitude
    modulation, a light noise floor, and pauses -- enough structure for codec
    overfitting without shipping recorded speech."""
    rng = np.random.default_rng(seed)
    n = int(duration_s * sr)
    t = np.arange(n) / sr

    f0 = 130.0 + 15.0 * np.sin(2 * np.pi * 0.5 * t) + 5.0 * np.sin(2 * np.pi * 2.3 * t)
    phase = 2 * np.pi * np.cumsum(f0) / sr
    x = np.zeros(n)
    for h in range(1, 9):
        amp = 1.0 / h * (0.7 + 0.3 * np.sin(2 * np.pi * (0.23 * h + 0.11) * t + h))
        x += amp * np.sin(h * phase + 0.1 * h)

    # light breath-noise floor with slow AM
    noise = rng.standard_normal(n) * 0.008
    x += noise * (0.5 + 0.5 * np.sin(2 * np.pi * 1.3 * t))

    # syllable-rate envelope with short pauses
    env = 0.6 + 0.4 * np.sin(2 * np.pi * 1.7 * t + 0.4)
    env *= (np.sin(2 * np.pi * 0.3 * t) > -0.9).astype(float)
    x *= env

    x /= np.max(np.abs(x)) * 1.25
    return x.astype(np.float32)


def write_wav(path, x, sr):
    pcm = np.clip(np.round(x * 32767.0), -32768, 32767).astype("<i2")
    with wave.open(path, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(sr)
        w.writeframes(pcm.tobytes())
    print(path, len(x), "samples")


if __name__ == "__main__":
    sr = 48000
    write_wav("utterance.wav", speech_like(10.0, sr, seed=7), sr)
    write_wav("short.wav", speech_like(1.0, sr, seed=11), sr)
