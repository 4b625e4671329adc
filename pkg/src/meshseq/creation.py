"""Parametric triangle meshes for tests, benchmarks, and demos."""

from __future__ import annotations

import numpy as np

from .mesh_io import Mesh


def triangle() -> Mesh:
    return Mesh([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], [[0, 1, 2]])


def tetrahedron() -> Mesh:
    vertices = [
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ]
    faces = [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]]
    return Mesh(vertices, faces)


def grid_patch(nx: int = 8, ny: int = 8, z: float = 0.0) -> Mesh:
    """Open flat grid in the z-plane; every quad split along one diagonal."""
    xs, ys = np.meshgrid(np.linspace(0, 1, nx), np.linspace(0, 1, ny), indexing="ij")
    vertices = np.column_stack([xs.ravel(), ys.ravel(), np.full(nx * ny, z)])
    faces = []
    for i in range(nx - 1):
        for j in range(ny - 1):
            a = i * ny + j
            b = a + ny
            faces.append([a, b, b + 1])
            faces.append([a, b + 1, a + 1])
    return Mesh(vertices, faces)


def wavy_patch(nx: int = 8, ny: int = 8, amplitude: float = 0.2, fx: float = 1.0, fy: float = 1.0) -> Mesh:
    """Open grid displaced by a sinusoidal height field."""
    base = grid_patch(nx, ny)
    v = base.vertices.copy()
    v[:, 2] = amplitude * np.sin(2 * np.pi * fx * v[:, 0]) * np.cos(2 * np.pi * fy * v[:, 1])
    return Mesh(v, base.faces)


def uv_sphere(n_lat: int = 12, n_lon: int = 16, radius: float = 1.0) -> Mesh:
    """Closed sphere from latitude rings with triangle fans at the poles."""
    if n_lat < 3 or n_lon < 3:
        raise ValueError("need n_lat >= 3 and n_lon >= 3")
    vertices = [[0.0, 0.0, radius]]
    for i in range(1, n_lat):
        theta = np.pi * i / n_lat
        for j in range(n_lon):
            phi = 2 * np.pi * j / n_lon
            vertices.append(
                [
                    radius * np.sin(theta) * np.cos(phi),
                    radius * np.sin(theta) * np.sin(phi),
                    radius * np.cos(theta),
                ]
            )
    vertices.append([0.0, 0.0, -radius])
    south = len(vertices) - 1
    ring = lambda i, j: 1 + (i - 1) * n_lon + (j % n_lon)
    faces = []
    for j in range(n_lon):
        faces.append([0, ring(1, j), ring(1, j + 1)])
    for i in range(1, n_lat - 1):
        for j in range(n_lon):
            a, b = ring(i, j), ring(i, j + 1)
            c, d = ring(i + 1, j), ring(i + 1, j + 1)
            faces.append([a, c, d])
            faces.append([a, d, b])
    for j in range(n_lon):
        faces.append([south, ring(n_lat - 1, j + 1), ring(n_lat - 1, j)])
    return Mesh(vertices, faces)


def icosphere(subdivisions: int = 2, radius: float = 1.0) -> Mesh:
    """Icosahedron subdivided and reprojected onto the sphere."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    vertices = np.array(
        [
            [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
            [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
            [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
        ],
        dtype=np.float64,
    )
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [v for v in vertices]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(i, j):
            key = (i, j) if i < j else (j, i)
            if key not in cache:
                verts.append((verts[i] + verts[j]) / 2.0)
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    pts = np.array(verts)
    pts *= radius / np.linalg.norm(pts, axis=1)[:, None]
    return Mesh(pts, np.array(faces, dtype=np.int64))


def torus(n_major: int = 16, n_minor: int = 12, major_radius: float = 1.0, minor_radius: float = 0.35) -> Mesh:
    """Closed torus: n_major x n_minor quads, each split into two triangles."""
    if n_major < 3 or n_minor < 3:
        raise ValueError("need n_major >= 3 and n_minor >= 3")
    vertices = []
    for i in range(n_major):
        u = 2 * np.pi * i / n_major
        for j in range(n_minor):
            v = 2 * np.pi * j / n_minor
            r = major_radius + minor_radius * np.cos(v)
            vertices.append([r * np.cos(u), r * np.sin(u), minor_radius * np.sin(v)])
    faces = []
    for i in range(n_major):
        for j in range(n_minor):
            a = i * n_minor + j
            b = ((i + 1) % n_major) * n_minor + j
            a1 = i * n_minor + (j + 1) % n_minor
            b1 = ((i + 1) % n_major) * n_minor + (j + 1) % n_minor
            faces.append([a, b, b1])
            faces.append([a, b1, a1])
    return Mesh(np.array(vertices), np.array(faces, dtype=np.int64))


def cylinder(n_seg: int = 16, n_height: int = 4, radius: float = 0.5, height: float = 2.0) -> Mesh:
    """Closed capped cylinder: side rings plus center-fan caps."""
    if n_seg < 3 or n_height < 1:
        raise ValueError("need n_seg >= 3 and n_height >= 1")
    vertices = []
    for i in range(n_height + 1):
        z = height * i / n_height - height / 2
        for j in range(n_seg):
            phi = 2 * np.pi * j / n_seg
            vertices.append([radius * np.cos(phi), radius * np.sin(phi), z])
    bottom = len(vertices)
    vertices.append([0.0, 0.0, -height / 2])
    top = len(vertices)
    vertices.append([0.0, 0.0, height / 2])
    faces = []
    for i in range(n_height):
        for j in range(n_seg):
            a = i * n_seg + j
            b = i * n_seg + (j + 1) % n_seg
            c = (i + 1) * n_seg + j
            d = (i + 1) * n_seg + (j + 1) % n_seg
            faces.append([a, b, d])
            faces.append([a, d, c])
    for j in range(n_seg):
        faces.append([bottom, (j + 1) % n_seg, j])
        base = n_height * n_seg
        faces.append([top, base + j, base + (j + 1) % n_seg])
    return Mesh(np.array(vertices), np.array(faces, dtype=np.int64))


def corpus_meshes(min_vertices: int = 500, max_vertices: int = 2000) -> list[tuple[str, Mesh]]:
    """Twenty named closed-manifold meshes with vertex counts in range."""
    specs = [
        ("icosphere_s3", lambda: icosphere(3)),
        ("uv_sphere_24x24", lambda: uv_sphere(24, 24)),
        ("uv_sphere_20x30", lambda: uv_sphere(20, 30)),
        ("uv_sphere_32x20", lambda: uv_sphere(32, 20)),
        ("uv_sphere_28x36", lambda: uv_sphere(28, 36)),
        ("uv_sphere_40x30", lambda: uv_sphere(40, 30)),
        ("torus_24x24", lambda: torus(24, 24)),
        ("torus_30x20", lambda: torus(30, 20)),
        ("torus_36x28", lambda: torus(36, 28)),
        ("torus_40x40", lambda: torus(40, 40)),
        ("torus_28x18_fat", lambda: torus(28, 18, 1.0, 0.6)),
        ("torus_44x30_thin", lambda: torus(44, 30, 1.0, 0.15)),
        ("cylinder_24x20", lambda: cylinder(24, 20)),
        ("cylinder_32x16", lambda: cylinder(32, 16)),
        ("cylinder_40x24", lambda: cylinder(40, 24)),
        ("cylinder_20x30_tall", lambda: cylinder(20, 30, 0.3, 4.0)),
        ("uv_sphere_16x40", lambda: uv_sphere(16, 40)),
        ("uv_sphere_36x24", lambda: uv_sphere(36, 24)),
        ("torus_32x34", lambda: torus(32, 34)),
        ("torus_20x26", lambda: torus(20, 26, 1.2, 0.45)),
    ]
    out = []
    for name, make in specs:
        mesh = make()
        if not min_vertices <= mesh.n_vertices <= max_vertices:
            raise ValueError(f"{name}: {mesh.n_vertices} vertices outside [{min_vertices}, {max_vertices}]")
        out.append((name, mesh))
    return out
