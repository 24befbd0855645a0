import './style.css';
import { ReviewApp } from './app';

const root = document.getElementById('app');
if (!root) throw new Error('missing #app mount point');
const app = new ReviewApp(root);
void app.start();
