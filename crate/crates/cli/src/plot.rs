use slvw_core::config::Study;

const HEAD: &str = "# Regenerates figures from the CSVs in this directory.\nimport pandas as pd\nimport matplotlib.pyplot as plt\nimport numpy as np\n\n";

pub fn script(study: Study) -> Option<String> {
    let body = match study {
        Study::FieldsAudit => return None,
        Study::OamTransfer => {
            "d = pd.read_csv('oam-transfer.csv')
for (b, s), g in d.groupby(['beam_index', 'sideband']):
    plt.semilogx(g.qperp_rho, g.lz, 'o-', label=f'beam {int(b)}, m={int(g.m.iloc[0])}, SB {int(s)}')
plt.xlabel('q_perp rho0')
plt.ylabel('<L_z> (hbar)')
plt.legend()
plt.savefig('oam-transfer.png', dpi=150)
"
        }
        Study::Dichroism => {
            "d = pd.read_csv('dichroism.csv')
for (w, s), g in d.groupby(['qperp_width', 'sideband']):
    plt.plot(np.degrees(g.theta_rad), g.dichroism, 'o-', label=f'q_perp w_X = {w:.2f}, SB {int(s)}')
plt.xlabel('theta_p (deg)')
plt.ylabel('D')
plt.legend()
plt.savefig('dichroism.png', dpi=150)
"
        }
        Study::RvbSpectra => {
            "d = pd.read_csv('rvb-polar.csv')
for (w, r, s), g in d.groupby(['waist_au', 'rho_au', 'sideband']):
    plt.plot(g.theta_rad, g['yield'], label=f'w={w:.0f}, rho={r:.0f}, SB {int(s)}')
plt.xlabel('theta (rad)')
plt.ylabel('yield')
plt.yscale('log')
plt.legend(fontsize=6)
plt.savefig('rvb-polar.png', dpi=150)
"
        }
        Study::Streak => {
            "d = pd.read_csv('spectrogram.csv')
m = d.pivot(index='energy_au', columns='delay_au', values='density')
plt.pcolormesh(m.columns, m.index, m.values, shading='auto')
s = pd.read_csv('streak.csv')
g = s[s.phi_p_rad == s.phi_p_rad.min()]
plt.plot(g.delay_au, g.coe_au, 'w-')
plt.xlabel('delay (a.u.)')
plt.ylabel('energy (a.u.)')
plt.savefig('spectrogram.png', dpi=150)
"
        }
        Study::Reconstruct => {
            "d = pd.read_csv('reconstruction.csv')
v = d[d.phase_valid == 1]
fig, ax = plt.subplots(2, 1, sharex=True)
ax[0].plot(d.phi_p_rad, d.amplitude_au, 'o', label='reconstructed')
ax[0].plot(d.phi_p_rad, d.true_amplitude_au, '-', label='input')
ax[1].plot(v.phi_p_rad, np.unwrap(v.phase_rad), 'o')
ax[1].plot(d.phi_p_rad, np.unwrap(d.true_phase_rad), '-')
ax[1].set_xlabel('phi_p (rad)')
ax[0].legend()
plt.savefig('reconstruction.png', dpi=150)
"
        }
    };
    Some(format!("{HEAD}{body}"))
}
