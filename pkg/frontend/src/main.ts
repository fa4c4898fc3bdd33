/** Browser entry point: mount the explorer against the service.
 * The API base defaults to the page origin; override with ?api=http://host:port.
 */

import { mount } from './app.js';

const params = new URLSearchParams(window.location.search);
const base = params.get('api') ?? window.location.origin;
const root = document.getElementById('app');
if (!root) throw new Error('missing #app element');
mount(root, base);
