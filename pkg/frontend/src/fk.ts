// Forward kinematics of the 7-revolute-joint serial chain, mirroring the
// service's classic Denavit-Hartenberg convention exactly: the console draws
// the arm from the same chain parameters the service advertises on /chain.

export interface LinkParameters {
  d_m: number;
  a_m: number;
  alpha_rad: number;
  theta_offset_rad: number;
}

export interface ChainDescription {
  links: LinkParameters[];
  base_position_m: number[];
  base_quaternion: number[]; // (w, x, y, z)
  joint_limits_deg: number[][];
  human_range_deg: number[][] | null;
}

export type Mat4 = Float64Array; // row-major 4x4

export function identity4(): Mat4 {
  const m = new Float64Array(16);
  m[0] = m[5] = m[10] = m[15] = 1;
  return m;
}

export function matmul4(a: Mat4, b: Mat4): Mat4 {
  const out = new Float64Array(16);
  for (let i = 0; i < 4; i++) {
    for (let j = 0; j < 4; j++) {
      let acc = 0;
      for (let k = 0; k < 4; k++) {
        acc += a[i * 4 + k] * b[k * 4 + j];
      }
      out[i * 4 + j] = acc;
    }
  }
  return out;
}

export function quatToMatrix(q: number[]): Mat4 {
  const [w, x, y, z] = q;
  const m = identity4();
  m[0] = 1 - 2 * (y * y + z * z);
  m[1] = 2 * (x * y - w * z);
  m[2] = 2 * (x * z + w * y);
  m[4] = 2 * (x * y + w * z);
  m[5] = 1 - 2 * (x * x + z * z);
  m[6] = 2 * (y * z - w * x);
  m[8] = 2 * (x * z - w * y);
  m[9] = 2 * (y * z + w * x);
  m[10] = 1 - 2 * (x * x + y * y);
  return m;
}

export function dhTransform(thetaRad: number, d: number, a: number, alphaRad: number): Mat4 {
  const ct = Math.cos(thetaRad);
  const st = Math.sin(thetaRad);
  const ca = Math.cos(alphaRad);
  const sa = Math.sin(alphaRad);
  const m = identity4();
  m[0] = ct; m[1] = -st * ca; m[2] = st * sa; m[3] = a * ct;
  m[4] = st; m[5] = ct * ca; m[6] = -ct * sa; m[7] = a * st;
  m[8] = 0; m[9] = sa; m[10] = ca; m[11] = d;
  return m;
}

function baseTransform(chain: ChainDescription): Mat4 {
  const m = quatToMatrix(chain.base_quaternion);
  m[3] = chain.base_position_m[0];
  m[7] = chain.base_position_m[1];
  m[11] = chain.base_position_m[2];
  return m;
}

/** Positions of the base and every joint frame origin: 8 points of 3. */
export function jointPositions(chain: ChainDescription, jointAnglesDeg: number[]): number[][] {
  if (jointAnglesDeg.length !== chain.links.length) {
    throw new Error(`expected ${chain.links.length} joint angles, got ${jointAnglesDeg.length}`);
  }
  let t = baseTransform(chain);
  const points: number[][] = [[t[3], t[7], t[11]]];
  for (let i = 0; i < chain.links.length; i++) {
    const link = chain.links[i];
    const theta = (jointAnglesDeg[i] * Math.PI) / 180 + link.theta_offset_rad;
    t = matmul4(t, dhTransform(theta, link.d_m, link.a_m, link.alpha_rad));
    points.push([t[3], t[7], t[11]]);
  }
  return points;
}

/** End-effector tip position in meters. */
export function tipPosition(chain: ChainDescription, jointAnglesDeg: number[]): number[] {
  const points = jointPositions(chain, jointAnglesDeg);
  return points[points.length - 1];
}
