"""Compiled inner loops: ray-voxel traversal, spin propagation along rays,
the transport derivative, chord-based line integrals and an RK4 reference
integrator.  Everything here works on plain float64 arrays; the public
modules wrap these kernels in typed containers."""

from __future__ import annotations

import numpy as np
from numba import njit

# Chords shorter than this (meters) are dropped: they carry no rotation and
# would only add division noise when normalizing field axes.
CHORD_DROP = 1e-12


@njit(cache=True)
def traverse_into(ox, oy, dx, dy, gx, gy, h, nx, ny, out_i, out_j, out_c):
    """Jacobs-style incremental traversal of a square-voxel grid.

    Walks the ray origin + t*direction (unit direction, t >= 0) through the
    box [gx, gx+nx*h] x [gy, gy+ny*h], writing voxel indices and chord
    lengths into the out arrays in the order the ray encounters the voxels.
    Returns the number of segments written.  A miss writes nothing.
    """
    x_hi = gx + nx * h
    y_hi = gy + ny * h

    tmin = 0.0
    tmax = 1e300
    if dx != 0.0:
        t1 = (gx - ox) / dx
        t2 = (x_hi - ox) / dx
        if t1 > t2:
            t1, t2 = t2, t1
        if t1 > tmin:
            tmin = t1
        if t2 < tmax:
            tmax = t2
    else:
        if ox <= gx or ox >= x_hi:
            return 0
    if dy != 0.0:
        t1 = (gy - oy) / dy
        t2 = (y_hi - oy) / dy
        if t1 > t2:
            t1, t2 = t2, t1
        if t1 > tmin:
            tmin = t1
        if t2 < tmax:
            tmax = t2
    else:
        if oy <= gy or oy >= y_hi:
            return 0
    if tmax - tmin <= CHORD_DROP:
        return 0

    x0 = ox + tmin * dx
    y0 = oy + tmin * dy
    i = int(np.floor((x0 - gx) / h))
    j = int(np.floor((y0 - gy) / h))
    if i < 0:
        i = 0
    elif i > nx - 1:
        i = nx - 1
    if j < 0:
        j = 0
    elif j > ny - 1:
        j = ny - 1

    if dx > 0.0:
        step_i = 1
        tx = (gx + (i + 1) * h - ox) / dx
        dtx = h / dx
    elif dx < 0.0:
        step_i = -1
        tx = (gx + i * h - ox) / dx
        dtx = -h / dx
    else:
        step_i = 0
        tx = 1e300
        dtx = 0.0
    if dy > 0.0:
        step_j = 1
        ty = (gy + (j + 1) * h - oy) / dy
        dty = h / dy
    elif dy < 0.0:
        step_j = -1
        ty = (gy + j * h - oy) / dy
        dty = -h / dy
    else:
        step_j = 0
        ty = 1e300
        dty = 0.0

    count = 0
    t = tmin
    while t < tmax - CHORD_DROP:
        if tx < ty:
            tnext = tx
        else:
            tnext = ty
        if tnext > tmax:
            tnext = tmax
        chord = tnext - t
        if chord > CHORD_DROP:
            out_i[count] = i
            out_j[count] = j
            out_c[count] = chord
            count += 1
        t = tnext
        if t >= tmax - CHORD_DROP:
            break
        if tx < ty:
            i += step_i
            tx += dtx
        elif ty < tx:
            j += step_j
            ty += dty
        else:
            i += step_i
            j += step_j
            tx += dtx
            ty += dty
        if i < 0 or i >= nx or j < 0 or j >= ny:
            break
    return count


@njit(cache=True, inline="always")
def _rotate_left(kx, ky, kz, phi, m):
    """m <- R(k, phi) @ m with R = cos(phi) I + sin(phi) H(k) + (1-cos) k k^T."""
    s = np.sin(phi)
    c = np.cos(phi)
    u = 1.0 - c
    r00 = c + u * kx * kx
    r01 = s * kz + u * kx * ky
    r02 = -s * ky + u * kx * kz
    r10 = -s * kz + u * kx * ky
    r11 = c + u * ky * ky
    r12 = s * kx + u * ky * kz
    r20 = s * ky + u * kx * kz
    r21 = -s * kx + u * ky * kz
    r22 = c + u * kz * kz
    for col in range(3):
        a0 = m[0, col]
        a1 = m[1, col]
        a2 = m[2, col]
        m[0, col] = r00 * a0 + r01 * a1 + r02 * a2
        m[1, col] = r10 * a0 + r11 * a1 + r12 * a2
        m[2, col] = r20 * a0 + r21 * a1 + r22 * a2


@njit(cache=True)
def propagate_ray_core(values, seg_i, seg_j, seg_c, n_seg, g, sigma):
    """Accumulate the ordered product of per-voxel rotations into sigma.

    g is the signed rate gamma_N / v; each voxel with field B contributes
    the rotation about B/|B| by g*|B|*chord, multiplied from the left.
    Returns the unsigned accumulated rotation angle along the ray.
    """
    sigma[:] = 0.0
    sigma[0, 0] = 1.0
    sigma[1, 1] = 1.0
    sigma[2, 2] = 1.0
    total = 0.0
    for n in range(n_seg):
        bx = values[seg_i[n], seg_j[n], 0]
        by = values[seg_i[n], seg_j[n], 1]
        bz = values[seg_i[n], seg_j[n], 2]
        mag = np.sqrt(bx * bx + by * by + bz * bz)
        if mag < 1e-15:
            continue
        phi = g * mag * seg_c[n]
        _rotate_left(bx / mag, by / mag, bz / mag, phi, sigma)
        total += abs(phi)
    return total


@njit(cache=True)
def scan_kernel(values, gx, gy, h, nx, ny, origins, dirs, g):
    """Propagate every ray; returns (3, 3, n_rays) spin entries and the
    per-ray accumulated angles."""
    n_rays = origins.shape[0]
    out = np.empty((3, 3, n_rays))
    angles = np.empty(n_rays)
    cap = nx + ny + 4
    seg_i = np.empty(cap, np.int64)
    seg_j = np.empty(cap, np.int64)
    seg_c = np.empty(cap)
    sigma = np.empty((3, 3))
    for r in range(n_rays):
        m = traverse_into(
            origins[r, 0], origins[r, 1], dirs[r, 0], dirs[r, 1],
            gx, gy, h, nx, ny, seg_i, seg_j, seg_c,
        )
        angles[r] = propagate_ray_core(values, seg_i, seg_j, seg_c, m, g, sigma)
        for a in range(3):
            for b in range(3):
                out[a, b, r] = sigma[a, b]
    return out, angles


@njit(cache=True)
def derivative_kernel(values, dvalues, gx, gy, h, nx, ny, origins, dirs, g):
    """Gateaux derivative of the ray transform in direction dvalues.

    Per ray: accumulate K = sum_segments Sigma_mid^T dB * chord with
    Sigma_mid the running product advanced by half the segment rotation,
    then emit g * Sigma_full @ H(K).
    """
    n_rays = origins.shape[0]
    out = np.empty((3, 3, n_rays))
    cap = nx + ny + 4
    seg_i = np.empty(cap, np.int64)
    seg_j = np.empty(cap, np.int64)
    seg_c = np.empty(cap)
    sigma = np.empty((3, 3))
    for r in range(n_rays):
        m = traverse_into(
            origins[r, 0], origins[r, 1], dirs[r, 0], dirs[r, 1],
            gx, gy, h, nx, ny, seg_i, seg_j, seg_c,
        )
        sigma[:] = 0.0
        sigma[0, 0] = 1.0
        sigma[1, 1] = 1.0
        sigma[2, 2] = 1.0
        k1 = 0.0
        k2 = 0.0
        k3 = 0.0
        for n in range(m):
            i = seg_i[n]
            j = seg_j[n]
            c = seg_c[n]
            bx = values[i, j, 0]
            by = values[i, j, 1]
            bz = values[i, j, 2]
            mag = np.sqrt(bx * bx + by * by + bz * bz)
            dbx = dvalues[i, j, 0]
            dby = dvalues[i, j, 1]
            dbz = dvalues[i, j, 2]
            if mag < 1e-15:
                k1 += (sigma[0, 0] * dbx + sigma[1, 0] * dby + sigma[2, 0] * dbz) * c
                k2 += (sigma[0, 1] * dbx + sigma[1, 1] * dby + sigma[2, 1] * dbz) * c
                k3 += (sigma[0, 2] * dbx + sigma[1, 2] * dby + sigma[2, 2] * dbz) * c
                continue
            kx = bx / mag
            ky = by / mag
            kz = bz / mag
            phi = g * mag * c
            _rotate_left(kx, ky, kz, 0.5 * phi, sigma)
            k1 += (sigma[0, 0] * dbx + sigma[1, 0] * dby + sigma[2, 0] * dbz) * c
            k2 += (sigma[0, 1] * dbx + sigma[1, 1] * dby + sigma[2, 1] * dbz) * c
            k3 += (sigma[0, 2] * dbx + sigma[1, 2] * dby + sigma[2, 2] * dbz) * c
            _rotate_left(kx, ky, kz, 0.5 * phi, sigma)
        # g * Sigma @ H(K), with H(K) rows (0,k3,-k2), (-k3,0,k1), (k2,-k1,0)
        for a in range(3):
            s0 = sigma[a, 0]
            s1 = sigma[a, 1]
            s2 = sigma[a, 2]
            out[a, 0, r] = g * (-s1 * k3 + s2 * k2)
            out[a, 1, r] = g * (s0 * k3 - s2 * k1)
            out[a, 2, r] = g * (-s0 * k2 + s1 * k1)
    return out


@njit(cache=True)
def chord_integral_kernel(img, gx, gy, h, nx, ny, origins, dirs):
    """Line integrals of a scalar image over every ray (chord-weighted sums)."""
    n_rays = origins.shape[0]
    out = np.zeros(n_rays)
    cap = nx + ny + 4
    seg_i = np.empty(cap, np.int64)
    seg_j = np.empty(cap, np.int64)
    seg_c = np.empty(cap)
    for r in range(n_rays):
        m = traverse_into(
            origins[r, 0], origins[r, 1], dirs[r, 0], dirs[r, 1],
            gx, gy, h, nx, ny, seg_i, seg_j, seg_c,
        )
        acc = 0.0
        for n in range(m):
            acc += img[seg_i[n], seg_j[n]] * seg_c[n]
        out[r] = acc
    return out


@njit(cache=True)
def rk4_ray_kernel(values, seg_i, seg_j, seg_c, n_seg, g, step):
    """Classical RK4 integration of dSigma/ds = g H(B) Sigma over the
    traversal segments, with B constant on each voxel.  Reference only."""
    sigma = np.eye(3)
    kmat = np.empty((3, 3))
    y2 = np.empty((3, 3))
    k1 = np.empty((3, 3))
    k2 = np.empty((3, 3))
    k3 = np.empty((3, 3))
    k4 = np.empty((3, 3))
    for n in range(n_seg):
        bx = values[seg_i[n], seg_j[n], 0]
        by = values[seg_i[n], seg_j[n], 1]
        bz = values[seg_i[n], seg_j[n], 2]
        # G = g * H(B): rows (0, b3, -b2), (-b3, 0, b1), (b2, -b1, 0) scaled
        kmat[0, 0] = 0.0
        kmat[0, 1] = g * bz
        kmat[0, 2] = -g * by
        kmat[1, 0] = -g * bz
        kmat[1, 1] = 0.0
        kmat[1, 2] = g * bx
        kmat[2, 0] = g * by
        kmat[2, 1] = -g * bx
        kmat[2, 2] = 0.0
        length = seg_c[n]
        n_sub = int(np.ceil(length / step))
        if n_sub < 1:
            n_sub = 1
        hs = length / n_sub
        for _ in range(n_sub):
            _mat3_mul(kmat, sigma, k1)
            _mat3_axpy(sigma, k1, 0.5 * hs, y2)
            _mat3_mul(kmat, y2, k2)
            _mat3_axpy(sigma, k2, 0.5 * hs, y2)
            _mat3_mul(kmat, y2, k3)
            _mat3_axpy(sigma, k3, hs, y2)
            _mat3_mul(kmat, y2, k4)
            for a in range(3):
                for b in range(3):
                    sigma[a, b] += (hs / 6.0) * (
                        k1[a, b] + 2.0 * k2[a, b] + 2.0 * k3[a, b] + k4[a, b]
                    )
    return sigma


@njit(cache=True)
def segment_field_kernel(starts, ends, points, out):
    """Closed-form field of straight current segments, summed per point.

    B = (a x b)(|a|+|b|) / (|a||b|(|a||b| + a.b)) per segment with a, b
    from the endpoints to the point; the mu0 I / 4 pi prefactor is applied
    by the caller.  Returns the smallest point-to-segment distance seen so
    the caller can reject singular evaluations.
    """
    n_seg = starts.shape[0]
    n_pts = points.shape[0]
    min_dist = 1e300
    for p in range(n_pts):
        px = points[p, 0]
        py = points[p, 1]
        pz = points[p, 2]
        bx_acc = 0.0
        by_acc = 0.0
        bz_acc = 0.0
        for s in range(n_seg):
            ax = px - starts[s, 0]
            ay = py - starts[s, 1]
            az = pz - starts[s, 2]
            bx = px - ends[s, 0]
            by = py - ends[s, 1]
            bz = pz - ends[s, 2]
            lx = ends[s, 0] - starts[s, 0]
            ly = ends[s, 1] - starts[s, 1]
            lz = ends[s, 2] - starts[s, 2]
            ll = lx * lx + ly * ly + lz * lz
            t = (ax * lx + ay * ly + az * lz) / ll
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            ddx = ax - t * lx
            ddy = ay - t * ly
            ddz = az - t * lz
            dist = np.sqrt(ddx * ddx + ddy * ddy + ddz * ddz)
            if dist < min_dist:
                min_dist = dist
            na = np.sqrt(ax * ax + ay * ay + az * az)
            nb = np.sqrt(bx * bx + by * by + bz * bz)
            denom = na * nb * (na * nb + ax * bx + ay * by + az * bz)
            if denom == 0.0:
                continue
            coef = (na + nb) / denom
            bx_acc += (ay * bz - az * by) * coef
            by_acc += (az * bx - ax * bz) * coef
            bz_acc += (ax * by - ay * bx) * coef
        out[p, 0] = bx_acc
        out[p, 1] = by_acc
        out[p, 2] = bz_acc
    return min_dist


@njit(cache=True, inline="always")
def _mat3_mul(a, b, out):
    for i in range(3):
        for j in range(3):
            out[i, j] = a[i, 0] * b[0, j] + a[i, 1] * b[1, j] + a[i, 2] * b[2, j]


@njit(cache=True, inline="always")
def _mat3_axpy(a, b, alpha, out):
    for i in range(3):
        for j in range(3):
            out[i, j] = a[i, j] + alpha * b[i, j]
