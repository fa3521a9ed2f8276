/** Service client. The UI performs no classification of its own: every
 * verdict pixel derives from the DiagnoseResponse returned here. */
/** Base URL for the service; same-origin by default, overridable via a
 * global set before the module loads (window.CRYSCREEN_BASE_URL). */
export function baseUrl() {
    const override = globalThis["CRYSCREEN_BASE_URL"];
    return typeof override === "string" ? override.replace(/\/$/, "") : "";
}
export async function fetchModelInfo() {
    const r = await fetch(`${baseUrl()}/v1/model`);
    if (!r.ok)
        throw new Error(`GET /v1/model failed: ${r.status}`);
    return (await r.json());
}
export async function postDiagnose(wav) {
    let r;
    try {
        r = await fetch(`${baseUrl()}/v1/diagnose`, {
            method: "POST",
            headers: { "content-type": "audio/wav" },
            body: wav,
        });
    }
    catch (e) {
        return { kind: "network", message: e instanceof Error ? e.message : String(e) };
    }
    if (r.status === 200) {
        return { kind: "ok", response: (await r.json()) };
    }
    const body = await r.json().catch(() => ({ message: r.statusText }));
    const message = typeof body.message === "string" ? body.message : r.statusText;
    if (r.status === 422)
        return { kind: "no_cry", message };
    if (r.status === 400 || r.status === 413)
        return { kind: "bad_format", message };
    return { kind: "network", message: `service error ${r.status}` };
}
