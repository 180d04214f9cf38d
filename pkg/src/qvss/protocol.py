"""Dealer/participant protocol: per-pixel encoding, shares, and recovery.

Two interchangeable backends:

* ``statevector`` keeps one live quantum register per pixel inside the
  ``SessionStore`` (standing in for the joint quantum system, since qubits
  cannot be copied); share files carry opaque handles into it, and
  recovery measures each register and XOR-decodes the outcome.
* ``sampled`` pre-measures at share time: each pixel's register is
  replaced by a uniformly drawn parity bitstring and participant j's share
  holds the j-th bit.  Every protocol step is a computational-basis
  measurement, so measuring early changes no observable distribution, and
  large n / large images become cheap.

Per-pixel randomness is derived as ``master_seed XOR splitmix64(pixel
index)``, which makes sharing deterministic, order-independent, and safe
to parallelize.

File formats (all integers little-endian):

* Share (.qvs): magic ``QVSS``, version u8, backend id u8 (1=statevector,
  2=sampled), n u16, participant u16, pixel count u32, width u32, height
  u32, session id (16 bytes); payload: per pixel a handle (pixel id u32 +
  qubit index u16) or packed sampled bits (MSB first); CRC32 trailer.
* Session (.qvse): magic ``QVSE``, the same header fields with the
  participant slot zeroed, then the master seed as u64, then per-pixel
  register blobs (statevector: n u16 followed by 2^n re/im float64 pairs;
  sampled: all outcome bits packed MSB first); CRC32 trailer.
"""

from __future__ import annotations

import hashlib
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chisquare

from .errors import FormatError, IncompleteSharesError, IntegrityError
from .image_io import BinaryImage
from .parity import ParitySpec, prepare_parity_state_direct, xor_decode_classical
from .statevector import (
    MAX_QUBITS,
    NORM_GUARD,
    StateVector,
    marginal_distribution,
    measure_all,
)

BACKEND_STATEVECTOR = "statevector"
BACKEND_SAMPLED = "sampled"

#: Sampled shares are classical bits, so the register cap does not bind.
MAX_SAMPLED_QUBITS = 64

#: Analytic uniformity tolerance (statevector audits).
AUDIT_TOLERANCE = 1e-12

#: Chi-square significance floor (sampled audits).
AUDIT_P_THRESHOLD = 0.001

_BACKEND_IDS = {BACKEND_STATEVECTOR: 1, BACKEND_SAMPLED: 2}
_BACKEND_NAMES = {v: k for k, v in _BACKEND_IDS.items()}

_FORMAT_VERSION = 1
_SHARE_MAGIC = b"QVSS"
_SESSION_MAGIC = b"QVSE"

_HEADER = struct.Struct("<4sBBHHIII16s")
_SEED_FIELD = struct.Struct("<Q")
_HANDLE = struct.Struct("<IH")
_REGISTER_SIZE = struct.Struct("<H")
_CRC = struct.Struct("<I")

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def pixel_rng(master_seed: int, pixel_index: int) -> np.random.Generator:
    """Deterministic per-pixel random stream, independent of pixel order."""
    return np.random.Generator(
        np.random.PCG64(master_seed ^ _splitmix64(pixel_index))
    )


def _check_seed(seed: int) -> int:
    if not isinstance(seed, int) or not 0 <= seed <= _MASK64:
        raise ValueError(f"seed must be an int in 0..2^64-1, got {seed!r}")
    return seed


@dataclass
class SessionStore:
    """Dealer-side store of every pixel's quantum register (or its sample)."""

    n: int
    backend: str
    master_seed: int
    width: int
    height: int
    session_id: bytes
    registers: list = field(repr=False)

    def __post_init__(self):
        if self.backend not in _BACKEND_IDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        if len(self.session_id) != 16:
            raise ValueError("session id must be 16 bytes")
        if len(self.registers) != self.pixel_count:
            raise ValueError(
                f"register table holds {len(self.registers)} entries for "
                f"{self.pixel_count} pixels"
            )

    @property
    def pixel_count(self) -> int:
        return self.width * self.height


@dataclass
class ShareFile:
    """Participant j's per-pixel payload, bound to one session.

    Payload entries are qubit handles ``(pixel id, qubit index)`` in the
    statevector backend or single bits in the sampled backend, one per
    pixel in pixel order.
    """

    participant: int
    n: int
    backend: str
    width: int
    height: int
    session_id: bytes
    payload: tuple

    def __post_init__(self):
        if self.backend not in _BACKEND_IDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        if not 1 <= self.participant <= self.n:
            raise ValueError(
                f"participant {self.participant} out of range 1..{self.n}"
            )
        if len(self.payload) != self.pixel_count:
            raise ValueError(
                f"payload holds {len(self.payload)} entries for "
                f"{self.pixel_count} pixels"
            )
        if self.backend == BACKEND_STATEVECTOR:
            for l, (pixel_id, qubit) in enumerate(self.payload, start=1):
                if pixel_id != l:
                    raise ValueError(
                        f"handle {l} references pixel {pixel_id}, expected {l}"
                    )
                if qubit != self.participant:
                    raise ValueError(
                        f"handle {l} references qubit {qubit}; share "
                        f"{self.participant} may only hold its own qubit"
                    )
        else:
            if any(b not in (0, 1) for b in self.payload):
                raise ValueError("sampled payload bits must be 0 or 1")

    @property
    def pixel_count(self) -> int:
        return self.width * self.height


@dataclass
class AuditReport:
    """What a cooperating subset of participants can see.

    ``distribution`` aggregates the subset's bit patterns over all pixels
    (exact marginals averaged in the statevector backend, empirical
    frequencies in the sampled backend).  ``max_deviation`` is against the
    uniform distribution; ``p_value`` is the sampled backend's chi-square
    uniformity test.
    """

    subset: tuple[int, ...]
    distribution: np.ndarray
    max_deviation: float
    verdict: str
    p_value: float | None = None


def _derive_session_id(image: BinaryImage, n: int, backend: str, seed: int) -> bytes:
    digest = hashlib.sha256()
    digest.update(b"QVSS:session:v1")
    digest.update(
        struct.pack(
            "<BHIIQ", _BACKEND_IDS[backend], n, image.width, image.height, seed
        )
    )
    digest.update(np.packbits(image.pixels).tobytes())
    return digest.digest()[:16]


def _draw_parity_bits(n: int, b: int, rng: np.random.Generator) -> tuple[int, ...]:
    # Uniform over the 2^(n-1) strings of parity b: free bits 1..n-1,
    # last bit fixes the parity.
    head = rng.integers(0, 2, size=n - 1)
    last = (int(head.sum()) & 1) ^ b
    return tuple(int(x) for x in head) + (last,)


def share_image(
    image: BinaryImage, n: int, backend: str, seed: int
) -> tuple[SessionStore, list[ShareFile]]:
    """Encode every pixel and split it into n per-participant shares.

    Deterministic given the seed: rerunning yields byte-identical shares.
    """
    if backend not in _BACKEND_IDS:
        raise ValueError(f"unknown backend {backend!r}")
    cap = MAX_QUBITS if backend == BACKEND_STATEVECTOR else MAX_SAMPLED_QUBITS
    if not isinstance(n, int) or not 2 <= n <= cap:
        raise ValueError(
            f"participant count must be in 2..{cap} for the {backend} backend, "
            f"got {n!r}"
        )
    _check_seed(seed)

    session_id = _derive_session_id(image, n, backend, seed)
    registers: list = []
    for l in range(1, image.pixel_count + 1):
        b = image.pixel(l)
        if backend == BACKEND_STATEVECTOR:
            registers.append(prepare_parity_state_direct(ParitySpec(n, b)))
        else:
            registers.append(_draw_parity_bits(n, b, pixel_rng(seed, l)))

    session = SessionStore(
        n=n,
        backend=backend,
        master_seed=seed,
        width=image.width,
        height=image.height,
        session_id=session_id,
        registers=registers,
    )
    shares = []
    for j in range(1, n + 1):
        if backend == BACKEND_STATEVECTOR:
            payload = tuple((l, j) for l in range(1, image.pixel_count + 1))
        else:
            payload = tuple(outcome[j - 1] for outcome in registers)
        shares.append(
            ShareFile(
                participant=j,
                n=n,
                backend=backend,
                width=image.width,
                height=image.height,
                session_id=session_id,
                payload=payload,
            )
        )
    return session, shares


def _check_share_set(shares, session: SessionStore) -> dict[int, ShareFile]:
    participants = [share.participant for share in shares]
    seen = set()
    for j in participants:
        if j in seen:
            raise IntegrityError(f"duplicate share for participant {j}")
        seen.add(j)
    for share in shares:
        if share.session_id != session.session_id:
            raise IntegrityError(
                f"share {share.participant} is bound to a different session"
            )
        if (
            share.n != session.n
            or share.backend != session.backend
            or share.width != session.width
            or share.height != session.height
        ):
            raise IntegrityError(
                f"share {share.participant} header disagrees with the session"
            )
    missing = set(range(1, session.n + 1)) - seen
    if missing:
        raise IncompleteSharesError(
            f"recovery needs all {session.n} shares; missing participants "
            f"{sorted(missing)}"
        )
    return {share.participant: share for share in shares}


def recover_pixel(bits) -> int:
    """Decoded color of one measured outcome: 0 = white, 1 = black."""
    return xor_decode_classical(bits)


def recover_image(
    shares, session: SessionStore, seed: int | None = None
) -> BinaryImage:
    """Measure (or collect) every pixel's shares and XOR-decode the image.

    Requires all n distinct shares bound to the session; anything less
    raises instead of guessing.  In the statevector backend the session's
    registers collapse in place.
    """
    by_participant = _check_share_set(shares, session)
    if seed is None:
        seed = int(np.random.SeedSequence().entropy) & _MASK64
    _check_seed(seed)

    colors = np.empty(session.pixel_count, dtype=np.uint8)
    if session.backend == BACKEND_STATEVECTOR:
        for l in range(1, session.pixel_count + 1):
            outcome, collapsed = measure_all(
                session.registers[l - 1], pixel_rng(seed, l)
            )
            session.registers[l - 1] = collapsed
            colors[l - 1] = recover_pixel(outcome)
    else:
        rows = [by_participant[j].payload for j in range(1, session.n + 1)]
        for l in range(session.pixel_count):
            colors[l] = recover_pixel(row[l] for row in rows)
    return BinaryImage(session.width, session.height, colors)


def audit_subset(session: SessionStore, subset) -> AuditReport:
    """What the given participants can learn from their shares alone.

    Statevector sessions get exact per-pixel marginals; sampled sessions
    get empirical frequencies over pixels plus a chi-square uniformity
    test.  A proper subset of an honest session is uniform, hence the
    "no-information" verdict; the full set decodes and gets
    "full-recovery".
    """
    subset = tuple(subset)
    if not subset:
        raise ValueError("audit subset must be non-empty")
    if len(set(subset)) != len(subset):
        raise ValueError(f"audit subset contains duplicates: {subset!r}")
    for j in subset:
        if not isinstance(j, int) or not 1 <= j <= session.n:
            raise ValueError(f"participant {j!r} out of range 1..{session.n}")

    k = len(subset)
    patterns = 1 << k
    uniform = 1.0 / patterns
    is_full = k == session.n
    p_value = None

    if session.backend == BACKEND_STATEVECTOR:
        total = np.zeros(patterns)
        max_dev = 0.0
        for register in session.registers:
            marg = marginal_distribution(register, subset).probabilities
            total += marg
            max_dev = max(max_dev, float(np.abs(marg - uniform).max()))
        distribution = total / session.pixel_count
    else:
        counts = np.zeros(patterns, dtype=np.int64)
        for outcome in session.registers:
            index = 0
            for j in subset:
                index = (index << 1) | outcome[j - 1]
            counts[index] += 1
        distribution = counts / session.pixel_count
        max_dev = float(np.abs(distribution - uniform).max())
        if not is_full:
            p_value = float(chisquare(counts).pvalue)

    if is_full:
        verdict = "full-recovery"
    elif session.backend == BACKEND_STATEVECTOR:
        verdict = "no-information" if max_dev < AUDIT_TOLERANCE else "information-leak"
    else:
        verdict = "no-information" if p_value > AUDIT_P_THRESHOLD else "information-leak"
    return AuditReport(subset, distribution, max_dev, verdict, p_value)


def _crc_wrap(blob: bytes) -> bytes:
    return blob + _CRC.pack(zlib.crc32(blob))


def _crc_unwrap(data: bytes, what: str) -> bytes:
    if len(data) < _HEADER.size + _CRC.size:
        raise FormatError(f"truncated {what}: {len(data)} bytes")
    blob, trailer = data[: -_CRC.size], data[-_CRC.size :]
    if zlib.crc32(blob) != _CRC.unpack(trailer)[0]:
        raise FormatError(f"{what} checksum mismatch")
    return blob


def _unpack_header(blob: bytes, magic: bytes, what: str):
    fields = _HEADER.unpack_from(blob)
    if fields[0] != magic:
        raise FormatError(f"bad magic {fields[0]!r} in {what}, expected {magic!r}")
    if fields[1] != _FORMAT_VERSION:
        raise FormatError(f"unsupported {what} format version {fields[1]}")
    if fields[2] not in _BACKEND_NAMES:
        raise FormatError(f"unknown backend id {fields[2]} in {what}")
    if fields[5] != fields[6] * fields[7]:
        raise FormatError(
            f"pixel count {fields[5]} does not match {fields[6]}x{fields[7]} in {what}"
        )
    return fields


def serialize_share(share: ShareFile) -> bytes:
    head = _HEADER.pack(
        _SHARE_MAGIC,
        _FORMAT_VERSION,
        _BACKEND_IDS[share.backend],
        share.n,
        share.participant,
        share.pixel_count,
        share.width,
        share.height,
        share.session_id,
    )
    if share.backend == BACKEND_STATEVECTOR:
        body = b"".join(_HANDLE.pack(l, q) for l, q in share.payload)
    else:
        body = np.packbits(np.array(share.payload, dtype=np.uint8)).tobytes()
    return _crc_wrap(head + body)


def deserialize_share(data: bytes) -> ShareFile:
    blob = _crc_unwrap(data, "share file")
    _, _, backend_id, n, participant, pixel_count, width, height, session_id = (
        _unpack_header(blob, _SHARE_MAGIC, "share file")
    )
    backend = _BACKEND_NAMES[backend_id]
    body = blob[_HEADER.size :]
    if backend == BACKEND_STATEVECTOR:
        expected = pixel_count * _HANDLE.size
        if len(body) != expected:
            raise FormatError(
                f"share payload holds {len(body)} bytes, expected {expected}"
            )
        payload = tuple(
            _HANDLE.unpack_from(body, i * _HANDLE.size) for i in range(pixel_count)
        )
    else:
        expected = (pixel_count + 7) // 8
        if len(body) != expected:
            raise FormatError(
                f"share payload holds {len(body)} bytes, expected {expected}"
            )
        bits = np.unpackbits(np.frombuffer(body, dtype=np.uint8))[:pixel_count]
        payload = tuple(int(b) for b in bits)
    try:
        return ShareFile(
            participant=participant,
            n=n,
            backend=backend,
            width=width,
            height=height,
            session_id=session_id,
            payload=payload,
        )
    except ValueError as exc:
        raise FormatError(f"invalid share file: {exc}") from None


def serialize_session(session: SessionStore) -> bytes:
    head = _HEADER.pack(
        _SESSION_MAGIC,
        _FORMAT_VERSION,
        _BACKEND_IDS[session.backend],
        session.n,
        0,
        session.pixel_count,
        session.width,
        session.height,
        session.session_id,
    )
    parts = [head, _SEED_FIELD.pack(session.master_seed)]
    if session.backend == BACKEND_STATEVECTOR:
        for register in session.registers:
            buffer = np.empty(2 * register.dim, dtype="<f8")
            buffer[0::2] = register.amplitudes.real
            buffer[1::2] = register.amplitudes.imag
            parts.append(_REGISTER_SIZE.pack(register.num_qubits))
            parts.append(buffer.tobytes())
    else:
        bits = np.array(
            [b for outcome in session.registers for b in outcome], dtype=np.uint8
        )
        parts.append(np.packbits(bits).tobytes())
    return _crc_wrap(b"".join(parts))


def deserialize_session(data: bytes) -> SessionStore:
    blob = _crc_unwrap(data, "session file")
    _, _, backend_id, n, _, pixel_count, width, height, session_id = _unpack_header(
        blob, _SESSION_MAGIC, "session file"
    )
    backend = _BACKEND_NAMES[backend_id]
    offset = _HEADER.size
    if len(blob) < offset + _SEED_FIELD.size:
        raise FormatError("truncated session file: missing master seed")
    (master_seed,) = _SEED_FIELD.unpack_from(blob, offset)
    offset += _SEED_FIELD.size

    registers: list = []
    if backend == BACKEND_STATEVECTOR:
        for l in range(1, pixel_count + 1):
            if len(blob) < offset + _REGISTER_SIZE.size:
                raise FormatError(f"truncated session file at register {l}")
            (reg_n,) = _REGISTER_SIZE.unpack_from(blob, offset)
            offset += _REGISTER_SIZE.size
            if reg_n != n:
                raise FormatError(
                    f"register {l} declares {reg_n} qubits, session declares {n}"
                )
            nbytes = (1 << reg_n) * 16
            if len(blob) < offset + nbytes:
                raise FormatError(f"truncated session file at register {l}")
            raw = np.frombuffer(blob, dtype="<f8", count=2 * (1 << reg_n), offset=offset)
            amps = raw[0::2] + 1j * raw[1::2]
            norm = float((np.abs(amps) ** 2).sum())
            if abs(norm - 1.0) > NORM_GUARD:
                raise FormatError(
                    f"register {l} norm deviates from 1 by {abs(norm - 1.0):.3e}"
                )
            registers.append(StateVector(reg_n, amps.astype(np.complex128)))
            offset += nbytes
    else:
        total_bits = pixel_count * n
        nbytes = (total_bits + 7) // 8
        if len(blob) - offset != nbytes:
            raise FormatError(
                f"session outcome payload holds {len(blob) - offset} bytes, "
                f"expected {nbytes}"
            )
        bits = np.unpackbits(np.frombuffer(blob, dtype=np.uint8, offset=offset))
        bits = bits[:total_bits].reshape(pixel_count, n)
        registers = [tuple(int(b) for b in row) for row in bits]
        offset = len(blob)
    if offset != len(blob):
        raise FormatError(f"{len(blob) - offset} trailing bytes after registers")
    try:
        return SessionStore(
            n=n,
            backend=backend,
            master_seed=master_seed,
            width=width,
            height=height,
            session_id=session_id,
            registers=registers,
        )
    except ValueError as exc:
        raise FormatError(f"invalid session file: {exc}") from None
